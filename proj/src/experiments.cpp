#include "grantprod/experiments.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

namespace grantprod {

namespace fs = std::filesystem;

namespace {

constexpr const char* kFieldOrder[] = {"MED", "DENT", "VET"};
constexpr const char* kFieldTitles[] = {"Medicine", "Dentistry", "Vet. Medicine"};

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write '" + path + "'");
  out << content;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

CrossValidationOptions cv_options(const ExperimentOptions& options, ClassifierKind kind) {
  CrossValidationOptions cv;
  cv.k = options.folds;
  cv.repetitions = options.repetitions;
  cv.seed = options.seed;
  if (options.use_grid) cv.grid = default_grid(kind);
  return cv;
}

AssembleOptions assemble_options(const ExperimentOptions& options,
                                 const std::vector<Family>& families) {
  AssembleOptions ao;
  ao.families.insert(families.begin(), families.end());
  ao.paper_mode = options.paper_mode;
  ao.productivity_threshold = options.productivity_threshold;
  return ao;
}

std::string finish_experiment(const std::string& dir, const ExperimentOptions& options,
                              const std::string& experiment,
                              const std::vector<ResultRow>& rows,
                              const std::string& extra_summary = "") {
  std::string csv = results_header() + "\n";
  for (const auto& row : rows) csv += format_result_row(row) + "\n";
  write_file(dir + "/results.csv", csv);

  std::ostringstream summary;
  summary << "experiment: " << experiment << "\n";
  summary << "config: " << options.descriptor(experiment) << "\n";
  summary << "rows: " << rows.size() << "\n";
  for (const char* field : kFieldOrder) {
    const ResultRow* best = nullptr;
    for (const auto& row : rows) {
      if (row.field != field) continue;
      if (!best || row.accuracy_mean > best->accuracy_mean) best = &row;
    }
    if (best) {
      summary << "best " << field << ": " << best->row_key << " / " << best->classifier << " = "
              << fmt(best->accuracy_mean) << " +- " << fmt(best->accuracy_std)
              << (best->significant ? " (significant)" : " (not significant)") << "\n";
    }
  }
  summary << extra_summary;
  write_file(dir + "/summary.txt", summary.str());
  return dir;
}

const ResultRow* find_row(const std::vector<ResultRow>& rows, const std::string& experiment,
                          const std::string& field, const std::string& row_key,
                          const std::string& classifier) {
  for (const auto& row : rows) {
    if (row.experiment == experiment && lower(row.field) == lower(field) &&
        (row_key.empty() || row.row_key == row_key) &&
        (classifier.empty() || row.classifier == classifier)) {
      return &row;
    }
  }
  return nullptr;
}

struct ReferenceRow {
  std::string table, field, row_key, classifier;
  double mean = 0, stddev = 0;
};

std::vector<ReferenceRow> load_reference(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open reference table '" + path + "'");
  std::vector<ReferenceRow> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      continue;
    }
    auto parts = split(line, ',');
    if (parts.size() != 6) fail(ErrorCode::ParseError, "bad reference row: " + line);
    rows.push_back({parts[0], parts[1], parts[2], parts[3], std::stod(parts[4]),
                    std::stod(parts[5])});
  }
  return rows;
}

const ReferenceRow* find_reference(const std::vector<ReferenceRow>& rows, const std::string& table,
                                   const std::string& field, const std::string& row_key,
                                   const std::string& classifier) {
  for (const auto& row : rows) {
    if (row.table == table && lower(row.field) == lower(field) && row.row_key == row_key &&
        (classifier.empty() || row.classifier == classifier)) {
      return &row;
    }
  }
  return nullptr;
}

std::string cell(const ResultRow* got, const ReferenceRow* ref) {
  char buf[96];
  std::string out;
  if (got) {
    std::snprintf(buf, sizeof(buf), "%.2f +- %.2f", got->accuracy_mean, got->accuracy_std);
    out = buf;
  } else {
    out = "-";
  }
  if (ref) {
    std::snprintf(buf, sizeof(buf), " [ref %.2f +- %.2f]", ref->mean, ref->stddev);
    out += buf;
  }
  return out;
}

void render_table(std::ostringstream& out, const std::string& title,
                  const std::vector<std::string>& header,
                  const std::vector<std::vector<std::string>>& body) {
  out << "== " << title << " ==\n";
  std::vector<std::size_t> widths(header.size(), 0);
  for (std::size_t j = 0; j < header.size(); ++j) widths[j] = header[j].size();
  for (const auto& row : body) {
    for (std::size_t j = 0; j < row.size(); ++j) widths[j] = std::max(widths[j], row[j].size());
  }
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      out << row[j] << std::string(widths[j] - row[j].size(), ' ');
      out << (j + 1 < row.size() ? " | " : "\n");
    }
  };
  emit(header);
  for (const auto& row : body) emit(row);
  out << "\n";
}

}  // namespace

std::vector<Family> ExperimentOptions::effective_families() const {
  return families.empty() ? all_families() : families;
}

std::vector<ClassifierKind> ExperimentOptions::effective_classifiers() const {
  if (!classifiers.empty()) return classifiers;
  return {ClassifierKind::DecisionTree, ClassifierKind::SVM, ClassifierKind::KNN,
          ClassifierKind::NaiveBayes, ClassifierKind::MLP};
}

std::string ExperimentOptions::descriptor(const std::string& experiment) const {
  std::ostringstream out;
  out << experiment << ";fields=";
  for (ResearchField f : fields) out << field_name(f) << "+";
  out << ";families=";
  for (Family f : effective_families()) out << family_name(f) << "+";
  out << ";classifiers=";
  for (ClassifierKind c : effective_classifiers()) out << classifier_kind_name(c) << "+";
  out << ";k=";
  for (int k : k_values) out << k << "+";
  out << ";seed=" << seed << ";reps=" << repetitions << ";folds=" << folds
      << ";paper_mode=" << paper_mode << ";grid=" << use_grid << ";sizes=";
  for (int s : subset_sizes) out << s << "+";
  out << ";trials=" << subset_trials << ";threshold=" << productivity_threshold;
  return out.str();
}

std::string results_header() {
  return "experiment,field,row_key,classifier,accuracy_mean,accuracy_std,repetitions,"
         "p_value,significant,seed";
}

std::string format_result_row(const ResultRow& r) {
  std::ostringstream out;
  out << r.experiment << ',' << r.field << ',' << r.row_key << ',' << r.classifier << ','
      << fmt(r.accuracy_mean) << ',' << fmt(r.accuracy_std) << ',' << r.repetitions << ','
      << fmt(r.p_value) << ',' << (r.significant ? 1 : 0) << ',' << r.seed;
  return out.str();
}

std::vector<ResultRow> parse_results_csv(const std::string& text) {
  std::vector<ResultRow> rows;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line != results_header()) fail(ErrorCode::ParseError, "unexpected results header");
      continue;
    }
    auto parts = split(line, ',');
    if (parts.size() != 10) fail(ErrorCode::ParseError, "bad results row: " + line);
    ResultRow r;
    r.experiment = parts[0];
    r.field = parts[1];
    r.row_key = parts[2];
    r.classifier = parts[3];
    r.accuracy_mean = std::stod(parts[4]);
    r.accuracy_std = std::stod(parts[5]);
    r.repetitions = std::stoi(parts[6]);
    r.p_value = std::stod(parts[7]);
    r.significant = parts[8] == "1";
    r.seed = std::stoull(parts[9]);
    rows.push_back(std::move(r));
  }
  return rows;
}

ResultRow to_result_row(const EvaluationReport& report, const std::string& experiment,
                        const std::string& field, const std::string& row_key,
                        const std::string& classifier, std::uint64_t seed) {
  ResultRow r;
  r.experiment = experiment;
  r.field = field;
  r.row_key = row_key;
  r.classifier = classifier;
  r.accuracy_mean = report.accuracy_mean;
  r.accuracy_std = report.accuracy_std;
  r.repetitions = report.repetitions;
  r.p_value = report.p_value;
  r.significant = report.significant;
  r.seed = seed;
  return r;
}

std::string experiment_output_dir(const ExperimentOptions& options, const std::string& experiment) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(options.descriptor(experiment))));
  const std::string dir = options.out_dir + "/" + experiment + "-" + buf;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create '" + dir + "': " + ec.message());
  return dir;
}

FeatureMatrix select_families(const FeatureMatrix& m, const std::vector<Family>& subset) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    if (std::find(subset.begin(), subset.end(), m.column_families[j]) != subset.end()) {
      names.push_back(m.column_names[j]);
    }
  }
  if (names.empty()) fail(ErrorCode::UnknownFamily, "family subset selects no columns");
  return select_columns(m, names);
}

std::string run_eval_single(const GrantCorpus& corpus, const ExperimentOptions& options) {
  const std::string dir = experiment_output_dir(options, "eval-single");
  std::vector<ResultRow> rows;
  for (ResearchField field : options.fields) {
    for (Family family : options.effective_families()) {
      const FeatureMatrix m = assemble(corpus, field, assemble_options(options, {family}));
      for (ClassifierKind kind : options.effective_classifiers()) {
        ClassifierSpec spec;
        spec.kind = kind;
        const EvaluationReport report = cross_validate(spec, m, cv_options(options, kind));
        rows.push_back(to_result_row(report, "eval-single", field_name(field),
                                     family_name(family), classifier_kind_name(kind),
                                     options.seed));
      }
    }
  }
  emit_plot(rows, dir + "/plot.svg", dir + "/plot_data.csv");
  return finish_experiment(dir, options, "eval-single", rows);
}

std::string run_eval_combo(const GrantCorpus& corpus, const ExperimentOptions& options) {
  const std::string dir = experiment_output_dir(options, "eval-combo");
  const auto families = options.effective_families();
  std::vector<std::string> family_names;
  for (Family f : families) family_names.push_back(family_name(f));
  std::vector<int> sizes;
  for (int s : options.subset_sizes) {
    if (s >= 1 && s <= static_cast<int>(families.size())) sizes.push_back(s);
  }
  if (sizes.empty()) fail(ErrorCode::InvalidConfig, "no usable subset sizes");

  std::vector<ResultRow> rows;
  for (ResearchField field : options.fields) {
    const FeatureMatrix full = assemble(corpus, field, assemble_options(options, families));
    for (ClassifierKind kind : options.effective_classifiers()) {
      ClassifierSpec spec;
      spec.kind = kind;
      auto evaluator = [&](const std::vector<std::string>& subset) {
        std::vector<Family> picked;
        for (const auto& name : subset) picked.push_back(parse_family(name));
        return cross_validate(spec, select_families(full, picked), cv_options(options, kind));
      };
      const SubsetSearchResult best = random_subset_search(
          family_names, sizes, options.subset_trials, evaluator, options.seed);
      rows.push_back(to_result_row(best.report, "eval-combo", field_name(field),
                                   join(best.best_subset, "+"), classifier_kind_name(kind),
                                   options.seed));
    }
  }
  return finish_experiment(dir, options, "eval-combo", rows);
}

std::string run_select(const GrantCorpus& corpus, const ExperimentOptions& options) {
  const std::string dir = experiment_output_dir(options, "select");
  std::vector<ResultRow> rows;
  std::string ranking_csv = "field,rank,feature,score\n";
  for (ResearchField field : options.fields) {
    const FeatureMatrix full =
        assemble(corpus, field, assemble_options(options, options.effective_families()));
    const FeatureRanking ranking = rank_features(full, options.seed);
    for (std::size_t i = 0; i < ranking.entries.size(); ++i) {
      ranking_csv += field_name(field) + "," + std::to_string(i + 1) + "," +
                     ranking.entries[i].first + "," + fmt(ranking.entries[i].second) + "\n";
    }
    for (int k : options.k_values) {
      // Synthetic corpora can have fewer columns than the requested preset.
      const int k_eff = std::min<int>(k, static_cast<int>(full.cols()));
      const FeatureMatrix reduced = select_columns(full, top_k(ranking, k_eff));
      ClassifierSpec spec;
      spec.kind = ClassifierKind::SVM;
      const EvaluationReport report =
          cross_validate(spec, reduced, cv_options(options, ClassifierKind::SVM));
      rows.push_back(to_result_row(report, "select", field_name(field),
                                   "top-" + std::to_string(k), "SVM", options.seed));
    }
  }
  write_file(dir + "/ranking.csv", ranking_csv);
  return finish_experiment(dir, options, "select", rows);
}

std::string run_vote(const GrantCorpus& corpus, const ExperimentOptions& options) {
  const std::string dir = experiment_output_dir(options, "vote");
  std::vector<ResultRow> rows;
  for (ResearchField field : options.fields) {
    const FeatureMatrix full =
        assemble(corpus, field, assemble_options(options, options.effective_families()));
    for (VotingMode mode : {VotingMode::All, VotingMode::Best}) {
      CrossValidationOptions cv;
      cv.k = options.folds;
      cv.repetitions = options.repetitions;
      cv.seed = options.seed;
      const EvaluationReport report =
          cross_validate_voting(make_voting_config(mode), full, cv);
      rows.push_back(to_result_row(report, "vote", field_name(field),
                                   mode == VotingMode::All ? "All" : "Best", "Voting",
                                   options.seed));
    }
  }
  return finish_experiment(dir, options, "vote", rows);
}

void emit_plot(const std::vector<ResultRow>& single_rows, const std::string& svg_path,
               const std::string& data_path) {
  if (single_rows.empty()) fail(ErrorCode::MissingResults, "no single-feature results to plot");

  // One bar per (field, family): the best classifier's accuracy.
  std::vector<std::string> fields, families;
  for (const auto& row : single_rows) {
    if (std::find(fields.begin(), fields.end(), row.field) == fields.end()) {
      fields.push_back(row.field);
    }
    if (std::find(families.begin(), families.end(), row.row_key) == families.end()) {
      families.push_back(row.row_key);
    }
  }
  struct Bar {
    std::string field, family, classifier;
    double value;
  };
  std::vector<Bar> bars;
  for (const auto& family : families) {
    for (const auto& field : fields) {
      const ResultRow* best = nullptr;
      for (const auto& row : single_rows) {
        if (row.field != field || row.row_key != family) continue;
        if (!best || row.accuracy_mean > best->accuracy_mean) best = &row;
      }
      if (best) bars.push_back({field, family, best->classifier, best->accuracy_mean});
    }
  }

  std::string data = "field,family,classifier,accuracy_mean\n";
  for (const auto& b : bars) {
    data += b.field + "," + b.family + "," + b.classifier + "," + fmt(b.value) + "\n";
  }
  write_file(data_path, data);

  const int bar_w = 18, gap = 6, group_gap = 24, left = 60, bottom = 60, top = 30;
  const int plot_h = 300;
  const int group_w = static_cast<int>(fields.size()) * (bar_w + gap) + group_gap;
  const int width = left + static_cast<int>(families.size()) * group_w + 40;
  const int height = top + plot_h + bottom;
  static const char* kColors[] = {"#4878a8", "#d1605e", "#6aa56e", "#b08cc3"};

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int pct = 0; pct <= 100; pct += 25) {
    const int y = top + plot_h - plot_h * pct / 100;
    svg << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << width - 20 << "\" y2=\""
        << y << "\" stroke=\"#dddddd\"/>\n";
    svg << "<text x=\"" << left - 8 << "\" y=\"" << y + 4
        << "\" text-anchor=\"end\">" << pct << "</text>\n";
  }
  for (std::size_t fi = 0; fi < families.size(); ++fi) {
    const int gx = left + static_cast<int>(fi) * group_w;
    for (std::size_t di = 0; di < fields.size(); ++di) {
      const Bar* bar = nullptr;
      for (const auto& b : bars) {
        if (b.family == families[fi] && b.field == fields[di]) bar = &b;
      }
      if (!bar) continue;
      const int h = static_cast<int>(plot_h * std::clamp(bar->value, 0.0, 100.0) / 100.0);
      const int x = gx + static_cast<int>(di) * (bar_w + gap);
      svg << "<rect x=\"" << x << "\" y=\"" << top + plot_h - h << "\" width=\"" << bar_w
          << "\" height=\"" << h << "\" fill=\"" << kColors[di % 4] << "\"/>\n";
    }
    svg << "<text x=\"" << gx + group_w / 2 - group_gap / 2 << "\" y=\"" << top + plot_h + 16
        << "\" text-anchor=\"middle\">" << families[fi] << "</text>\n";
  }
  for (std::size_t di = 0; di < fields.size(); ++di) {
    const int x = left + static_cast<int>(di) * 90;
    svg << "<rect x=\"" << x << "\" y=\"" << height - 24 << "\" width=\"12\" height=\"12\" fill=\""
        << kColors[di % 4] << "\"/>\n";
    svg << "<text x=\"" << x + 16 << "\" y=\"" << height - 14 << "\">" << fields[di]
        << "</text>\n";
  }
  svg << "</svg>\n";
  write_file(svg_path, svg.str());
}

std::string render_report(const std::string& results_root, const std::string& reference_csv) {
  std::vector<ResultRow> rows;
  std::error_code ec;
  if (fs::exists(results_root, ec)) {
    std::vector<std::string> files;
    for (auto it = fs::recursive_directory_iterator(results_root, ec);
         !ec && it != fs::recursive_directory_iterator(); ++it) {
      if (it->is_regular_file() && it->path().filename() == "results.csv") {
        files.push_back(it->path().string());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      std::ifstream in(file, std::ios::binary);
      std::stringstream buffer;
      buffer << in.rdbuf();
      for (auto& row : parse_results_csv(buffer.str())) rows.push_back(std::move(row));
    }
  }
  if (rows.empty()) {
    fail(ErrorCode::MissingResults, "no results found under '" + results_root + "'");
  }
  const std::vector<ReferenceRow> reference = load_reference(reference_csv);

  std::ostringstream out;
  out << "RESULT TABLES\n";
  out << "Accuracy is percent, mean +- std over repetitions. Cells marked [ref ...] show\n"
      << "previously published values measured on a proprietary corpus; they are\n"
      << "rendered for comparison only and are never asserted.\n\n";

  static const char* kClassifiers[] = {"DTrees", "SVM", "kNN", "Bayes", "MLP"};
  static const char* kFamilies[] = {"pubFeat", "pubCitFeat", "grntFeat",  "areaFeat",
                                    "collabFeat", "instFeatA", "instFeatB", "instFeatC",
                                    "subjFeatA", "subjFeatB", "subjFeatC"};

  {
    std::vector<std::vector<std::string>> body;
    for (const char* method : kClassifiers) {
      std::vector<std::string> row = {method};
      for (const char* field : kFieldOrder) {
        row.push_back(cell(find_row(rows, "eval-combo", field, "", method),
                           find_reference(reference, "combinations", field, "best-combination",
                                          method)));
      }
      body.push_back(row);
    }
    render_table(out, "Best feature combination per classifier",
                 {"Method", kFieldTitles[0], kFieldTitles[1], kFieldTitles[2]}, body);
  }
  {
    std::vector<std::vector<std::string>> body;
    for (int k : {10, 20, 50, 100}) {
      const std::string key = "top-" + std::to_string(k);
      std::vector<std::string> row = {key};
      for (const char* field : kFieldOrder) {
        row.push_back(cell(find_row(rows, "select", field, key, "SVM"),
                           find_reference(reference, "relevance", field, key, "SVM")));
      }
      body.push_back(row);
    }
    render_table(out, "Most relevant features (SVM)",
                 {"k relevant features", kFieldTitles[0], kFieldTitles[1], kFieldTitles[2]}, body);
  }
  {
    std::vector<std::vector<std::string>> body;
    for (const char* mode : {"All", "Best"}) {
      std::vector<std::string> row = {mode};
      for (const char* field : kFieldOrder) {
        row.push_back(cell(find_row(rows, "vote", field, mode, ""),
                           find_reference(reference, "voting", field, mode, "")));
      }
      body.push_back(row);
    }
    render_table(out, "Voting ensembles",
                 {"Method", kFieldTitles[0], kFieldTitles[1], kFieldTitles[2]}, body);
  }
  {
    const std::pair<const char*, const char*> approaches[] = {
        {"single-feature", "eval-single"},
        {"feature-combination", "eval-combo"},
        {"feature-relevance", "select"},
        {"voting-system", "vote"}};
    std::vector<std::vector<std::string>> body;
    for (const auto& [key, experiment] : approaches) {
      std::vector<std::string> row = {key};
      for (const char* field : kFieldOrder) {
        const ResultRow* best = nullptr;
        for (const auto& r : rows) {
          if (r.experiment != experiment || r.field != field) continue;
          if (!best || r.accuracy_mean > best->accuracy_mean) best = &r;
        }
        row.push_back(cell(best, find_reference(reference, "summary", field, key, "")));
      }
      body.push_back(row);
    }
    render_table(out, "Best result per approach",
                 {"Method", kFieldTitles[0], kFieldTitles[1], kFieldTitles[2]}, body);
  }
  for (std::size_t fi = 0; fi < 3; ++fi) {
    std::vector<std::vector<std::string>> body;
    for (const char* family : kFamilies) {
      std::vector<std::string> row = {family};
      for (const char* method : kClassifiers) {
        row.push_back(cell(find_row(rows, "eval-single", kFieldOrder[fi], family, method),
                           find_reference(reference, "single", kFieldOrder[fi], family, method)));
      }
      body.push_back(row);
    }
    render_table(out, std::string("Single features: ") + kFieldTitles[fi],
                 {"Features", kClassifiers[0], kClassifiers[1], kClassifiers[2], kClassifiers[3],
                  kClassifiers[4]},
                 body);
  }
  return out.str();
}

}  // namespace grantprod
