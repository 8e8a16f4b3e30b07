// Command-line front end: convert / validate / repair single files and
// run batch evaluations over JSONL manifests. Exit codes: 0 success,
// 1 validation or parse failure, 2 usage error, 3 partial batch failure.

#include <atomic>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "doctags/export.hpp"
#include "doctags/geometry.hpp"
#include "doctags/latex_norm.hpp"
#include "doctags/metrics.hpp"
#include "doctags/model.hpp"
#include "doctags/otsl.hpp"
#include "doctags/parser.hpp"
#include "doctags/strings.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitPartial = 3;

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return true;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  out << content;
  return static_cast<bool>(out);
}

void print_diagnostics(const std::vector<doctags::Diagnostic>& diags) {
  for (const doctags::Diagnostic& d : diags) {
    json line;
    line["severity"] = doctags::severity_name(d.severity);
    line["code"] = d.code;
    line["message"] = d.message;
    line["span"] = {d.span.begin, d.span.end};
    if (!d.block_path.empty()) line["path"] = d.block_path;
    std::cerr << line.dump() << "\n";
  }
}

// ------------------------------------------------------------- manifests

struct ManifestEntry {
  std::string id;
  json payload;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
};

std::optional<Manifest> load_manifest(const std::string& path, std::string& error) {
  auto content = read_file(path);
  if (!content) {
    error = "cannot read manifest " + path;
    return std::nullopt;
  }
  Manifest manifest;
  std::istringstream lines(*content);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (doctags::is_blank(line)) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("id") || !j.at("id").is_string()) {
      error = path + ":" + std::to_string(lineno) + ": entry must be an object with a string id";
      return std::nullopt;
    }
    manifest.entries.push_back(ManifestEntry{j.at("id").get<std::string>(), std::move(j)});
  }
  return manifest;
}

// Inline "text" payload, or file content via "path".
std::optional<std::string> entry_content(const ManifestEntry& entry, std::string& error) {
  if (entry.payload.contains("text")) return entry.payload.at("text").get<std::string>();
  if (entry.payload.contains("html")) return entry.payload.at("html").get<std::string>();
  if (entry.payload.contains("path")) {
    auto content = read_file(entry.payload.at("path").get<std::string>());
    if (!content) {
      error = "cannot read " + entry.payload.at("path").get<std::string>();
      return std::nullopt;
    }
    return content;
  }
  error = "entry carries neither text/html nor path";
  return std::nullopt;
}

// DocTags sources are converted to Markdown first (tables and page
// furniture excluded) so text metrics see plain formatting.
std::optional<std::string> text_payload(const ManifestEntry& entry, std::string& error) {
  std::string err;
  auto content = entry_content(entry, err);
  if (!content) {
    error = err;
    return std::nullopt;
  }
  bool is_doctags = entry.payload.value("format", "") == "doctags" ||
                    doctags::trim_ws(*content).starts_with("<doctag");
  if (!is_doctags) return content;
  doctags::ParseResult parsed = doctags::parse(*content, doctags::ParseMode::Lenient);
  return doctags::to_markdown(*parsed.document, {});
}

const doctags::Block* find_table_block(const doctags::Block& block) {
  if (block.table) return &block;
  for (const doctags::Block& child : block.children) {
    if (const doctags::Block* found = find_table_block(child)) return found;
  }
  return nullptr;
}

std::optional<doctags::HtmlNode> table_payload(const ManifestEntry& entry, std::string& error) {
  std::string err;
  auto content = entry_content(entry, err);
  if (!content) {
    error = err;
    return std::nullopt;
  }
  std::string_view trimmed = doctags::trim_ws(*content);
  if (trimmed.starts_with("<doctag") || content->find("<otsl>") != std::string::npos) {
    doctags::ParseResult parsed = doctags::parse(*content, doctags::ParseMode::Lenient);
    for (const doctags::Page& page : parsed.document->pages) {
      for (const doctags::Block& block : page) {
        if (const doctags::Block* found = find_table_block(block)) {
          return doctags::grid_to_html(*found->table);
        }
      }
    }
    error = "no table found in DocTags payload";
    return std::nullopt;
  }
  doctags::HtmlParseResult parsed = doctags::parse_html_table(*content);
  if (!parsed.table) {
    error = "no <table> element found in payload";
    return std::nullopt;
  }
  return parsed.table;
}

// --------------------------------------------------------------- reports

struct ItemResult {
  std::string id;
  json fields;       // scores, or {"error": ...}
  bool ok = false;
};

json aggregate_means(const std::vector<ItemResult>& items, const std::vector<std::string>& keys) {
  json agg;
  int n = 0;
  std::map<std::string, double> sums;
  for (const ItemResult& item : items) {
    if (!item.ok) continue;
    ++n;
    for (const std::string& key : keys) sums[key] += item.fields.at(key).get<double>();
  }
  for (const std::string& key : keys) agg[key] = n > 0 ? sums[key] / n : 0.0;
  agg["evaluated"] = n;
  return agg;
}

// Pairs pred/gt entries by id, reporting one error item per id that is
// missing on either side. Order follows the pred manifest, then
// gt-only ids in gt order.
struct PairedEntries {
  std::vector<std::pair<const ManifestEntry*, const ManifestEntry*>> pairs;  // both present
  std::vector<ItemResult> mismatches;
};

PairedEntries pair_entries(const Manifest& pred, const Manifest& gt) {
  PairedEntries out;
  std::map<std::string, const ManifestEntry*> gt_by_id;
  for (const ManifestEntry& e : gt.entries) gt_by_id[e.id] = &e;
  std::map<std::string, bool> seen;
  for (const ManifestEntry& e : pred.entries) {
    auto it = gt_by_id.find(e.id);
    if (it == gt_by_id.end()) {
      ItemResult r;
      r.id = e.id;
      r.fields["error"] = "id missing from ground-truth manifest";
      out.mismatches.push_back(std::move(r));
      continue;
    }
    seen[e.id] = true;
    out.pairs.emplace_back(&e, it->second);
  }
  for (const ManifestEntry& e : gt.entries) {
    if (!seen.count(e.id)) {
      ItemResult r;
      r.id = e.id;
      r.fields["error"] = "id missing from prediction manifest";
      out.mismatches.push_back(std::move(r));
    }
  }
  return out;
}

// Runs `work` over the index range in a small thread pool; results land
// at their own index so report order matches manifest order.
template <typename Work>
void parallel_for(std::size_t count, unsigned jobs, Work&& work) {
  unsigned n = std::max(1u, jobs);
  if (n == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < std::min<std::size_t>(n, count); ++t) {
    pool.emplace_back([&next, count, &work] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) work(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

int write_report(const std::string& path, json report) {
  if (!write_output(path, report.dump(2) + "\n")) {
    std::cerr << "error: cannot write report to " << path << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

// ------------------------------------------------------------ label map

struct LabelMap {
  std::vector<std::string> classes;
  std::map<std::string, std::string> aliases;

  std::string resolve(const std::string& label) const {
    auto it = aliases.find(label);
    return it != aliases.end() ? it->second : label;
  }

  static LabelMap defaults() {
    LabelMap m;
    m.classes = {"Text", "Section Header", "List Item", "Table", "Picture", "Formula"};
    m.aliases = {
        {"text", "Text"},           {"paragraph", "Text"},
        {"caption", "Text"},        {"footnote", "Text"},
        {"page_header", "Text"},    {"page_footer", "Text"},
        {"title", "Section Header"}, {"section_header", "Section Header"},
        {"list_item", "List Item"}, {"otsl", "Table"},
        {"table", "Table"},         {"document_index", "Table"},
        {"picture", "Picture"},     {"figure", "Picture"},
        {"formula", "Formula"},     {"equation", "Formula"},
    };
    return m;
  }
};

std::optional<LabelMap> load_label_map(const std::string& path, std::string& error) {
  auto content = read_file(path);
  if (!content) {
    error = "cannot read label map " + path;
    return std::nullopt;
  }
  json j = json::parse(*content, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("classes")) {
    error = "label map must be a JSON object with a classes array";
    return std::nullopt;
  }
  LabelMap map;
  for (const auto& cls : j.at("classes")) map.classes.push_back(cls.get<std::string>());
  if (j.contains("aliases")) {
    for (const auto& [from, to] : j.at("aliases").items()) {
      map.aliases[from] = to.get<std::string>();
    }
  }
  return map;
}

// -------------------------------------------------------------- commands

struct ConvertArgs {
  std::string input;
  std::string to = "markdown";
  std::string out;
  bool lenient = false;
  bool include_page_furniture = false;
  bool include_tables = false;
};

int cmd_convert(const ConvertArgs& args) {
  auto content = read_file(args.input);
  if (!content) {
    std::cerr << "error: cannot read " << args.input << "\n";
    return kExitFailure;
  }
  doctags::ParseMode mode =
      args.lenient ? doctags::ParseMode::Lenient : doctags::ParseMode::Strict;
  doctags::ParseResult parsed = doctags::parse(*content, mode);
  print_diagnostics(parsed.diagnostics);
  if (!parsed.document) return kExitFailure;

  std::string rendered;
  if (args.to == "markdown") {
    doctags::MarkdownOptions opts;
    opts.include_page_furniture = args.include_page_furniture;
    opts.include_tables = args.include_tables;
    rendered = doctags::to_markdown(*parsed.document, opts);
  } else if (args.to == "html") {
    rendered = doctags::to_html(*parsed.document);
  } else {
    rendered = doctags::to_json(*parsed.document) + "\n";
  }
  if (!write_output(args.out, rendered)) {
    std::cerr << "error: cannot write " << args.out << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_validate(const std::string& input) {
  auto content = read_file(input);
  if (!content) {
    std::cerr << "error: cannot read " << input << "\n";
    return kExitFailure;
  }
  doctags::ParseResult parsed = doctags::parse(*content, doctags::ParseMode::Strict);
  std::vector<doctags::Diagnostic> diags = std::move(parsed.diagnostics);
  if (parsed.document) {
    for (doctags::Diagnostic& d : doctags::validate(*parsed.document)) {
      diags.push_back(std::move(d));
    }
  }
  print_diagnostics(diags);
  return doctags::has_errors(diags) ? kExitFailure : kExitOk;
}

int cmd_repair(const std::string& input, const std::string& out) {
  auto content = read_file(input);
  if (!content) {
    std::cerr << "error: cannot read " << input << "\n";
    return kExitFailure;
  }
  doctags::ParseResult parsed = doctags::parse(*content, doctags::ParseMode::Lenient);
  print_diagnostics(parsed.diagnostics);
  const doctags::Document& doc = *parsed.document;
  bool empty = true;
  for (const doctags::Page& page : doc.pages) {
    if (!page.empty()) empty = false;
  }
  if (empty) {
    std::cerr << "error: repaired document is empty\n";
    return kExitFailure;
  }
  std::string repaired = doctags::serialize(doc);
  if (!write_output(out, repaired + "\n")) {
    std::cerr << "error: cannot write " << out << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

struct EvalArgs {
  std::string task;
  std::string pred;
  std::string gt;
  std::string report;
  std::string label_map;
  std::string policy;
  unsigned jobs = std::thread::hardware_concurrency();
};

int eval_pairwise(const EvalArgs& args, const Manifest& pred, const Manifest& gt) {
  PairedEntries paired = pair_entries(pred, gt);

  doctags::NormPolicy policy = doctags::NormPolicy::defaults();
  if (args.task == "formula" && !args.policy.empty()) {
    auto content = read_file(args.policy);
    if (!content) {
      std::cerr << "error: cannot read policy " << args.policy << "\n";
      return kExitUsage;
    }
    doctags::PolicyLoadResult loaded = doctags::load_policy(*content);
    print_diagnostics(loaded.diagnostics);
    if (!loaded.policy) return kExitUsage;
    policy = std::move(*loaded.policy);
  }

  std::vector<ItemResult> items(paired.pairs.size());
  parallel_for(paired.pairs.size(), args.jobs, [&](std::size_t i) {
    const auto& [pe, ge] = paired.pairs[i];
    ItemResult& item = items[i];
    item.id = pe->id;
    std::string error;
    if (args.task == "text" || args.task == "formula") {
      std::optional<std::string> ptext = text_payload(*pe, error);
      std::optional<std::string> gtext;
      if (ptext) gtext = text_payload(*ge, error);
      if (!ptext || !gtext) {
        item.fields["error"] = error;
        return;
      }
      std::string p = *ptext;
      std::string g = *gtext;
      if (args.task == "formula") {
        p = doctags::normalize(p, policy).text;
        g = doctags::normalize(g, policy).text;
      }
      doctags::TextScore score = doctags::score_text(p, g);
      item.fields["edit_distance"] = score.edit_distance;
      item.fields["precision"] = score.precision;
      item.fields["recall"] = score.recall;
      item.fields["f1"] = score.f1;
      item.fields["bleu"] = score.bleu;
      item.ok = true;
    } else {  // table
      std::optional<doctags::HtmlNode> ptab = table_payload(*pe, error);
      std::optional<doctags::HtmlNode> gtab;
      if (ptab) gtab = table_payload(*ge, error);
      if (!ptab || !gtab) {
        item.fields["error"] = error;
        return;
      }
      item.fields["teds"] = doctags::teds(*ptab, *gtab, false);
      item.fields["teds_structure"] = doctags::teds(*ptab, *gtab, true);
      item.ok = true;
    }
  });

  for (ItemResult& miss : paired.mismatches) items.push_back(std::move(miss));

  json report;
  report["schema_version"] = 1;
  report["task"] = args.task;
  if (args.task == "formula") report["policy_hash"] = doctags::policy_fingerprint(policy);
  json jitems = json::array();
  std::size_t skipped = 0;
  for (const ItemResult& item : items) {
    json ji = item.fields;
    ji["id"] = item.id;
    if (!item.ok) ++skipped;
    jitems.push_back(std::move(ji));
  }
  report["items"] = std::move(jitems);
  std::vector<std::string> keys =
      args.task == "table"
          ? std::vector<std::string>{"teds", "teds_structure"}
          : std::vector<std::string>{"edit_distance", "precision", "recall", "f1", "bleu"};
  report["aggregate"] = aggregate_means(items, keys);
  report["skipped"] = skipped;

  int rc = write_report(args.report, std::move(report));
  if (rc != kExitOk) return rc;
  if (skipped == items.size() && !items.empty()) return kExitFailure;
  return skipped > 0 ? kExitPartial : kExitOk;
}

std::optional<std::vector<doctags::Detection>> entry_detections(const ManifestEntry& entry,
                                                                const LabelMap& labels,
                                                                bool expect_scores,
                                                                std::string& error) {
  json payload = entry.payload;
  if (!payload.contains("detections") && payload.contains("path")) {
    auto content = read_file(payload.at("path").get<std::string>());
    if (!content) {
      error = "cannot read " + payload.at("path").get<std::string>();
      return std::nullopt;
    }
    json loaded = json::parse(*content, nullptr, false);
    if (loaded.is_discarded() || !loaded.is_object() || !loaded.contains("detections")) {
      error = "detection file must be a JSON object with a detections array";
      return std::nullopt;
    }
    payload = std::move(loaded);
    if (entry.payload.contains("page_width")) payload["page_width"] = entry.payload.at("page_width");
    if (entry.payload.contains("page_height"))
      payload["page_height"] = entry.payload.at("page_height");
  }
  if (!payload.contains("detections") || !payload.at("detections").is_array()) {
    error = "entry has no detections array";
    return std::nullopt;
  }
  std::vector<doctags::Detection> out;
  for (const json& jd : payload.at("detections")) {
    doctags::Detection det;
    det.image_id = entry.id;
    det.label = labels.resolve(jd.value("label", ""));
    if (jd.contains("box")) {
      const json& box = jd.at("box");
      if (!box.is_array() || box.size() != 4) {
        error = "box must be [x1,y1,x2,y2]";
        return std::nullopt;
      }
      det.box = doctags::Rect{box[0].get<double>(), box[1].get<double>(), box[2].get<double>(),
                              box[3].get<double>()};
    } else if (jd.contains("loc")) {
      const json& loc = jd.at("loc");
      if (!loc.is_array() || loc.size() != 4) {
        error = "loc must be [x1,y1,x2,y2]";
        return std::nullopt;
      }
      doctags::LocBox lb{loc[0].get<int>(), loc[1].get<int>(), loc[2].get<int>(),
                         loc[3].get<int>()};
      if (payload.contains("page_width") && payload.contains("page_height")) {
        doctags::PixelBox px = doctags::decode_loc(lb, payload.at("page_width").get<double>(),
                                                   payload.at("page_height").get<double>());
        det.box = px.rect();
      } else {
        det.box = doctags::Rect{static_cast<double>(lb.x1), static_cast<double>(lb.y1),
                                static_cast<double>(lb.x2), static_cast<double>(lb.y2)};
      }
    } else {
      error = "detection has neither box nor loc";
      return std::nullopt;
    }
    if (jd.contains("score")) det.score = jd.at("score").get<double>();
    if (expect_scores && !det.score) {
      error = "prediction detection without a score";
      return std::nullopt;
    }
    out.push_back(std::move(det));
  }
  return out;
}

int eval_layout(const EvalArgs& args, const Manifest& pred, const Manifest& gt,
                const LabelMap& labels) {
  PairedEntries paired = pair_entries(pred, gt);

  std::vector<doctags::Detection> all_preds, all_gts;
  std::vector<ItemResult> items;
  std::size_t skipped = 0;

  for (const auto& [pe, ge] : paired.pairs) {
    ItemResult item;
    item.id = pe->id;
    std::string error;
    std::optional<std::vector<doctags::Detection>> pdets =
        entry_detections(*pe, labels, /*expect_scores=*/true, error);
    std::optional<std::vector<doctags::Detection>> gdets;
    if (pdets) gdets = entry_detections(*ge, labels, false, error);
    if (!pdets || !gdets) {
      item.fields["error"] = error;
      ++skipped;
      items.push_back(std::move(item));
      continue;
    }
    doctags::MapReport per_item = doctags::evaluate_map(*pdets, *gdets, labels.classes);
    item.fields["map"] = per_item.map;
    item.ok = true;
    items.push_back(std::move(item));
    all_preds.insert(all_preds.end(), pdets->begin(), pdets->end());
    all_gts.insert(all_gts.end(), gdets->begin(), gdets->end());
  }
  for (ItemResult& miss : paired.mismatches) {
    ++skipped;
    items.push_back(std::move(miss));
  }

  doctags::MapReport corpus = doctags::evaluate_map(all_preds, all_gts, labels.classes);
  print_diagnostics(corpus.diagnostics);

  json report;
  report["schema_version"] = 1;
  report["task"] = "layout";
  json jitems = json::array();
  for (const ItemResult& item : items) {
    json ji = item.fields;
    ji["id"] = item.id;
    jitems.push_back(std::move(ji));
  }
  report["items"] = std::move(jitems);
  json agg;
  agg["map"] = corpus.map;
  json per_class;
  for (const auto& [cls, ap] : corpus.per_class) {
    per_class[cls] = ap ? json(*ap) : json(nullptr);
  }
  agg["per_class"] = std::move(per_class);
  agg["evaluated"] = items.size() - skipped;
  report["aggregate"] = std::move(agg);
  report["skipped"] = skipped;

  int rc = write_report(args.report, std::move(report));
  if (rc != kExitOk) return rc;
  if (skipped == items.size() && !items.empty()) return kExitFailure;
  return skipped > 0 ? kExitPartial : kExitOk;
}

int cmd_eval(const EvalArgs& args) {
  std::string error;
  auto pred = load_manifest(args.pred, error);
  if (!pred) {
    std::cerr << "error: " << error << "\n";
    return kExitFailure;
  }
  auto gt = load_manifest(args.gt, error);
  if (!gt) {
    std::cerr << "error: " << error << "\n";
    return kExitFailure;
  }

  if (args.task == "layout") {
    LabelMap labels = LabelMap::defaults();
    if (!args.label_map.empty()) {
      auto loaded = load_label_map(args.label_map, error);
      if (!loaded) {
        std::cerr << "error: " << error << "\n";
        return kExitUsage;
      }
      labels = std::move(*loaded);
    }
    return eval_layout(args, *pred, *gt, labels);
  }
  return eval_pairwise(args, *pred, *gt);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DocTags toolkit: parse, repair, convert, and evaluate document markup"};
  app.require_subcommand(1);

  ConvertArgs convert_args;
  CLI::App* convert = app.add_subcommand("convert", "Convert DocTags to markdown/html/json");
  convert->add_option("input", convert_args.input, "DocTags input file")->required();
  convert->add_option("--to", convert_args.to, "Output format")
      ->check(CLI::IsMember({"markdown", "html", "json"}));
  convert->add_option("-o,--out", convert_args.out, "Output file (default stdout)");
  convert->add_flag("--lenient", convert_args.lenient, "Repairing parse instead of strict");
  convert->add_flag("--include-page-furniture", convert_args.include_page_furniture,
                    "Keep page headers/footers in markdown");
  convert->add_flag("--include-tables", convert_args.include_tables,
                    "Render tables in markdown");

  std::string validate_input;
  CLI::App* validate = app.add_subcommand("validate", "Strict-parse and report diagnostics");
  validate->add_option("input", validate_input, "DocTags input file")->required();

  std::string repair_input, repair_out;
  CLI::App* repair = app.add_subcommand("repair", "Lenient-parse and write canonical DocTags");
  repair->add_option("input", repair_input, "DocTags input file")->required();
  repair->add_option("--out", repair_out, "Output file (default stdout)");

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "Batch evaluation over JSONL manifests");
  eval->add_option("--task", eval_args.task, "Evaluation task")
      ->required()
      ->check(CLI::IsMember({"text", "table", "layout", "formula"}));
  eval->add_option("--pred", eval_args.pred, "Prediction manifest (JSONL)")->required();
  eval->add_option("--gt", eval_args.gt, "Ground-truth manifest (JSONL)")->required();
  eval->add_option("--report", eval_args.report, "Report output path")->required();
  eval->add_option("--label-map", eval_args.label_map, "Layout label map JSON");
  eval->add_option("--policy", eval_args.policy, "Formula normalization policy JSON");
  eval->add_option("--jobs", eval_args.jobs, "Worker threads for batch scoring");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (convert->parsed()) return cmd_convert(convert_args);
    if (validate->parsed()) return cmd_validate(validate_input);
    if (repair->parsed()) return cmd_repair(repair_input, repair_out);
    if (eval->parsed()) return cmd_eval(eval_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
