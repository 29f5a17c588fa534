#include "grantprod.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "grantprod/experiments.hpp"
#include "grantprod/synth.hpp"

namespace {

using grantprod::ErrorCode;

thread_local std::string g_last_error;

gp_status map_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError:
      return GP_ERR_PARSE;
    case ErrorCode::DuplicateId:
    case ErrorCode::DanglingReference:
    case ErrorCode::UnknownResearcher:
    case ErrorCode::UnknownInstitution:
    case ErrorCode::UnknownAreaCode:
    case ErrorCode::UnknownGrant:
    case ErrorCode::UnknownFamily:
      return GP_ERR_CORPUS;
    case ErrorCode::DegenerateData:
    case ErrorCode::InsufficientData:
      return GP_ERR_DATA;
    case ErrorCode::InvalidHyperparameter:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::WrongModelKind:
    case ErrorCode::EmptyNode:
    case ErrorCode::EmptyEnsemble:
    case ErrorCode::KOutOfRange:
      return GP_ERR_MODEL;
    case ErrorCode::InvalidConfig:
      return GP_ERR_CONFIG;
    case ErrorCode::MissingResults:
      return GP_ERR_NO_RESULTS;
    case ErrorCode::IoError:
      return GP_ERR_IO;
  }
  return GP_ERR_INTERNAL;
}

template <typename Fn>
gp_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return GP_OK;
  } catch (const grantprod::Error& e) {
    g_last_error = e.what();
    return map_code(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return GP_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

grantprod::ExperimentOptions parse_experiment_options(const char* options_json) {
  using nlohmann::json;
  grantprod::ExperimentOptions options;
  if (!options_json || !*options_json) return options;
  json j;
  try {
    j = json::parse(options_json);
  } catch (const std::exception& e) {
    grantprod::fail(ErrorCode::InvalidConfig, std::string("experiment options: ") + e.what());
  }
  if (j.contains("fields")) {
    options.fields.clear();
    for (const auto& f : j.at("fields")) {
      options.fields.push_back(grantprod::parse_field(f.get<std::string>()));
    }
  }
  if (j.contains("families")) {
    for (const auto& f : j.at("families")) {
      options.families.push_back(grantprod::parse_family(f.get<std::string>()));
    }
  }
  if (j.contains("classifiers")) {
    for (const auto& c : j.at("classifiers")) {
      options.classifiers.push_back(grantprod::parse_classifier_kind(c.get<std::string>()));
    }
  }
  if (j.contains("k")) options.k_values = j.at("k").get<std::vector<int>>();
  options.seed = j.value("seed", options.seed);
  options.repetitions = j.value("repetitions", options.repetitions);
  options.folds = j.value("folds", options.folds);
  options.paper_mode = j.value("paper_mode", options.paper_mode);
  options.use_grid = j.value("grid", options.use_grid);
  if (j.contains("subset_sizes")) options.subset_sizes = j.at("subset_sizes").get<std::vector<int>>();
  options.subset_trials = j.value("subset_trials", options.subset_trials);
  options.productivity_threshold =
      j.value("productivity_threshold", options.productivity_threshold);
  options.out_dir = j.value("out", options.out_dir);
  if (options.repetitions < 1 || options.folds < 2) {
    grantprod::fail(ErrorCode::InvalidConfig, "repetitions must be >= 1 and folds >= 2");
  }
  return options;
}

}  // namespace

struct gp_corpus {
  grantprod::GrantCorpus corpus;
};

extern "C" {

const char* gp_last_error(void) { return g_last_error.c_str(); }

void gp_string_free(char* s) { std::free(s); }

gp_status gp_corpus_open(const char* grants_path, const char* researchers_path,
                         const char* publications_path, const char* institutions_path,
                         const char* taxonomy_path, gp_corpus** out) {
  if (!out) {
    g_last_error = "null output pointer";
    return GP_ERR_CONFIG;
  }
  *out = nullptr;
  return guarded([&] {
    grantprod::CorpusPaths paths;
    paths.grants = grants_path ? grants_path : "";
    paths.researchers = researchers_path ? researchers_path : "";
    paths.publications = publications_path ? publications_path : "";
    paths.institutions = institutions_path ? institutions_path : "";
    paths.taxonomy = taxonomy_path ? taxonomy_path : "";
    auto handle = new gp_corpus{grantprod::load_corpus(paths)};
    *out = handle;
  });
}

void gp_corpus_close(gp_corpus* corpus) { delete corpus; }

gp_status gp_corpus_summary(const gp_corpus* corpus, char** out_text) {
  if (!corpus || !out_text) {
    g_last_error = "null argument";
    return GP_ERR_CONFIG;
  }
  return guarded([&] { *out_text = dup_string(corpus->corpus.ingestion.to_text()); });
}

gp_status gp_synth_generate(const char* config_json, const char* out_dir) {
  if (!out_dir || !*out_dir) {
    g_last_error = "null output directory";
    return GP_ERR_CONFIG;
  }
  return guarded([&] {
    const grantprod::GeneratorConfig config =
        (config_json && *config_json) ? grantprod::GeneratorConfig::from_json(config_json)
                                      : grantprod::GeneratorConfig{};
    std::filesystem::create_directories(out_dir);
    grantprod::generate(config, grantprod::SynthPaths::in_dir(out_dir));
  });
}

gp_status gp_features_csv(const gp_corpus* corpus, const char* field, const char* families_csv,
                          int paper_mode, char** out_csv) {
  if (!corpus || !field || !out_csv) {
    g_last_error = "null argument";
    return GP_ERR_CONFIG;
  }
  return guarded([&] {
    grantprod::AssembleOptions options;
    options.paper_mode = paper_mode != 0;
    if (families_csv && *families_csv) {
      std::string list = families_csv;
      std::size_t pos = 0;
      while (pos <= list.size()) {
        const std::size_t next = list.find(',', pos);
        const std::string name =
            list.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
        if (!name.empty()) options.families.insert(grantprod::parse_family(name));
        if (next == std::string::npos) break;
        pos = next + 1;
      }
    } else {
      for (grantprod::Family f : grantprod::all_families()) options.families.insert(f);
    }
    const grantprod::FeatureMatrix m =
        grantprod::assemble(corpus->corpus, grantprod::parse_field(field), options);
    *out_csv = dup_string(m.to_csv());
  });
}

gp_status gp_experiment_run(const gp_corpus* corpus, const char* experiment,
                            const char* options_json, char** out_dir_used) {
  if (!corpus || !experiment) {
    g_last_error = "null argument";
    return GP_ERR_CONFIG;
  }
  return guarded([&] {
    const grantprod::ExperimentOptions options = parse_experiment_options(options_json);
    const std::string name = experiment;
    std::string dir;
    if (name == "eval-single") {
      dir = grantprod::run_eval_single(corpus->corpus, options);
    } else if (name == "eval-combo") {
      dir = grantprod::run_eval_combo(corpus->corpus, options);
    } else if (name == "select") {
      dir = grantprod::run_select(corpus->corpus, options);
    } else if (name == "vote") {
      dir = grantprod::run_vote(corpus->corpus, options);
    } else {
      grantprod::fail(ErrorCode::InvalidConfig, "unknown experiment: '" + name + "'");
    }
    if (out_dir_used) *out_dir_used = dup_string(dir);
  });
}

gp_status gp_report_render(const char* results_root, const char* reference_csv, char** out_text) {
  if (!results_root || !reference_csv || !out_text) {
    g_last_error = "null argument";
    return GP_ERR_CONFIG;
  }
  return guarded(
      [&] { *out_text = dup_string(grantprod::render_report(results_root, reference_csv)); });
}

}  // extern "C"
