#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "grantprod/date.hpp"
#include "grantprod/error.hpp"

namespace grantprod {

enum class ResearchField { MED, DENT, VET, OTHER };

ResearchField parse_field(const std::string& s);
std::string field_name(ResearchField f);

enum class ScholarshipKind { Undergrad, Masters, Doctoral, Postdoc };

constexpr const char* kScholarshipKindNames[] = {"undergrad", "masters", "doctoral", "postdoc"};

struct Grant {
  std::string id;  // "yyyy/nnnnn-d"
  std::string pi_id;
  ResearchField field = ResearchField::OTHER;
  Date start_date;
  int duration_months = 0;
  std::vector<std::string> keywords;
  std::vector<std::string> publication_ids;
  std::vector<std::string> associated_researcher_ids;
  int associated_researcher_count = 0;
  std::string host_institution_id;
  bool degenerate = false;  // no usable keywords after normalization

  Date end_date() const { return add_months(start_date, duration_months); }
};

struct Publication {
  std::string id;
  int year = 0;
  int citation_count = 0;
  std::vector<std::string> coauthor_ids;
  std::optional<std::string> institution_id;
};

struct ScholarshipEvent {
  ScholarshipKind kind;
  Date date;
};

struct Researcher {
  std::string id;
  std::string institution_id;
  std::vector<std::string> grant_ids;
  std::vector<std::string> publication_ids;
  std::vector<ScholarshipEvent> scholarships;
  std::vector<std::string> area_codes;  // level-3 taxonomy codes
};

struct Institution {
  std::string id;
  std::string name;
  bool is_local = true;  // affiliated with a Brazilian institution
};

struct AreaTaxonomy {
  struct Entry {
    std::string level2;
    std::string level1;
  };
  std::map<std::string, Entry> by_level3;

  const Entry& resolve(const std::string& level3) const;
};

struct CorpusPaths {
  std::string grants;
  std::string researchers;
  std::string publications;
  std::string institutions;
  std::string taxonomy;
};

struct IngestionReport {
  std::size_t grant_count = 0;
  std::size_t researcher_count = 0;
  std::size_t publication_count = 0;
  std::size_t institution_count = 0;
  std::size_t taxonomy_count = 0;
  std::vector<std::string> warnings;

  std::string to_text() const;
};

struct GrantCorpus {
  std::map<std::string, Grant> grants;
  std::map<std::string, Researcher> researchers;
  std::map<std::string, Publication> publications;
  std::map<std::string, Institution> institutions;
  AreaTaxonomy taxonomy;
  std::vector<std::string> institution_index;  // lexicographically sorted ids
  IngestionReport ingestion;

  std::size_t institution_position(const std::string& id) const;
};

enum class Label { Productive, Unproductive };

inline const char* label_name(Label l) {
  return l == Label::Productive ? "Productive" : "Unproductive";
}

struct PriorGrant {
  const Grant* grant = nullptr;
  int publication_count = 0;
  int associated_researcher_count = 0;
};

struct PriorPublication {
  int year = 0;
  int citation_count = 0;
  int coauthor_count = 0;
};

// A researcher's history truncated strictly before cutoff_date.
struct ResearcherSnapshot {
  std::string researcher_id;
  Date cutoff_date;
  std::vector<PriorGrant> prior_grants;            // start_date < cutoff
  std::vector<PriorPublication> prior_publications;  // year < cutoff.year
  std::map<std::string, int> subject_counts;       // normalized keywords of prior grants
  std::set<std::string> local_collaborators;
  std::set<std::string> abroad_collaborators;
  std::set<std::string> distinct_coauthors;
  int scholarship_counts[4] = {0, 0, 0, 0};  // indexed by ScholarshipKind
  std::string institution_id;
  std::vector<std::string> area_codes;
};

// Lowercases ASCII, trims, collapses internal whitespace. Bytes outside
// ASCII pass through unchanged, so diacritics are preserved.
std::string normalize_subject(const std::string& raw);

GrantCorpus load_corpus(const CorpusPaths& paths);
void serialize_corpus(const GrantCorpus& corpus, const CorpusPaths& paths);

Label label_grant(const Grant& grant, int threshold = 1);

ResearcherSnapshot snapshot(const GrantCorpus& corpus, const std::string& researcher_id,
                            const Date& cutoff_date);

struct EligibilityWindow {
  Date start_before{2016, 1, 1};
  int min_duration_months = 23;
  int max_duration_months = 24;
};

std::vector<const Grant*> eligible_grants(const GrantCorpus& corpus, ResearchField field,
                                          const EligibilityWindow& window = {});

}  // namespace grantprod
