#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "grantprod/corpus.hpp"

namespace grantprod {

// Canonical family order; column layout follows this order everywhere.
enum class Family {
  PubFeat,
  PubCitFeat,
  GrntFeat,
  AreaFeat,
  CollabFeat,
  InstFeatA,
  InstFeatB,
  InstFeatC,
  SubjFeatA,
  SubjFeatB,
  SubjFeatC,
};

constexpr int kFamilyCount = 11;

Family parse_family(const std::string& name);
std::string family_name(Family f);
std::vector<Family> all_families();

struct FeatureVector {
  std::vector<std::string> names;
  std::vector<double> values;
  std::vector<Family> family_tags;  // parallel to names

  void append(Family family, std::string name, double value);
};

struct SubjectRecord {
  int grant_count = 0;
  int productive_count = 0;

  double success_rate() const {
    return grant_count > 0 ? static_cast<double>(productive_count) / grant_count : 0.0;
  }
};

enum class StatsScope { Global, LocalToResearcher };

struct SubjectStats {
  std::map<std::string, SubjectRecord> by_subject;
  StatsScope scope = StatsScope::Global;

  double rate(const std::string& subject) const {
    auto it = by_subject.find(subject);
    return it == by_subject.end() ? 0.0 : it->second.success_rate();
  }
};

struct InstitutionRecord {
  int hosted_grant_count = 0;
  int publication_count = 0;
  int productive_grant_count = 0;

  double success_rate() const {
    return hosted_grant_count > 0
               ? static_cast<double>(productive_grant_count) / hosted_grant_count
               : 0.0;
  }
};

struct InstitutionStats {
  std::map<std::string, InstitutionRecord> by_institution;

  const InstitutionRecord& at(const std::string& id) const {
    static const InstitutionRecord empty;
    auto it = by_institution.find(id);
    return it == by_institution.end() ? empty : it->second;
  }
};

struct FeatureMatrix {
  std::vector<std::string> column_names;
  std::vector<Family> column_families;
  std::vector<double> values;  // row-major
  std::vector<Label> labels;
  std::vector<std::string> instance_ids;  // grant ids

  std::size_t rows() const { return labels.size(); }
  std::size_t cols() const { return column_names.size(); }
  const double* row(std::size_t i) const { return values.data() + i * cols(); }

  std::string to_csv() const;  // header + label + grant_id columns, %.10g values
};

// Per-family extractors. Zero-denominator ratios are 0 by convention.
FeatureVector pub_feat(const ResearcherSnapshot& s);
FeatureVector pub_cit_feat(const ResearcherSnapshot& s, int cutoff_year);
FeatureVector grnt_feat(const ResearcherSnapshot& s);
FeatureVector area_feat(const ResearcherSnapshot& s, const AreaTaxonomy& taxonomy);
FeatureVector collab_feat(const ResearcherSnapshot& s);
FeatureVector inst_feat_a(const ResearcherSnapshot& s, const InstitutionStats& stats);
FeatureVector inst_feat_b(const ResearcherSnapshot& s, const std::vector<std::string>& institution_index);
FeatureVector inst_feat_c(const ResearcherSnapshot& s, const std::vector<std::string>& institution_index,
                          const InstitutionStats& stats);
FeatureVector subj_feat_a(const ResearcherSnapshot& s, const SubjectStats& global_stats,
                          const SubjectStats& local_stats);
FeatureVector subj_feat_b(const ResearcherSnapshot& s, const SubjectStats& global_stats,
                          const SubjectStats& local_stats, int k);
FeatureVector subj_feat_c(const ResearcherSnapshot& s);

double subject_success_rate(const std::string& subject, const std::vector<const Grant*>& grants,
                            int threshold = 1);

// Success statistics over grants; when cutoff is set, only grants that
// ended strictly before it contribute (leakage-safe scope).
SubjectStats compute_subject_stats(const GrantCorpus& corpus, const Date* cutoff, int threshold = 1);
SubjectStats compute_local_subject_stats(const ResearcherSnapshot& s, int threshold = 1);
InstitutionStats compute_institution_stats(const GrantCorpus& corpus, const Date* cutoff,
                                           int threshold = 1);

struct AssembleOptions {
  std::set<Family> families;
  int subj_b_k = 10;
  int productivity_threshold = 1;
  bool paper_mode = false;  // whole-dataset subject/institution statistics
  EligibilityWindow window;
};

FeatureMatrix assemble(const GrantCorpus& corpus, ResearchField field, const AssembleOptions& options);

// The PI's k most frequent subjects, descending frequency, ties broken
// lexicographically.
std::vector<std::string> top_subjects(const std::map<std::string, int>& counts, int k);

}  // namespace grantprod
