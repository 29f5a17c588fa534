#include "grantprod/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace grantprod {

namespace {

const char* kFamilyNames[kFamilyCount] = {
    "pubFeat",   "pubCitFeat", "grntFeat",  "areaFeat",  "collabFeat", "instFeatA",
    "instFeatB", "instFeatC",  "subjFeatA", "subjFeatB", "subjFeatC",
};

struct Summary {
  double mean = 0;
  double stddev = 0;  // population
  double max = 0;
};

Summary summarize(const std::vector<double>& xs) {
  Summary s;
  if (xs.empty()) return s;
  double sum = 0, max = xs[0];
  for (double x : xs) {
    sum += x;
    max = std::max(max, x);
  }
  s.mean = sum / static_cast<double>(xs.size());
  double ss = 0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(ss / static_cast<double>(xs.size()));
  s.max = max;
  return s;
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

Family parse_family(const std::string& name) {
  for (int i = 0; i < kFamilyCount; ++i) {
    if (name == kFamilyNames[i]) return static_cast<Family>(i);
  }
  fail(ErrorCode::UnknownFamily, "unknown feature family: '" + name + "'");
}

std::string family_name(Family f) { return kFamilyNames[static_cast<int>(f)]; }

std::vector<Family> all_families() {
  std::vector<Family> fs;
  for (int i = 0; i < kFamilyCount; ++i) fs.push_back(static_cast<Family>(i));
  return fs;
}

void FeatureVector::append(Family family, std::string name, double value) {
  names.push_back(std::move(name));
  values.push_back(value);
  family_tags.push_back(family);
}

FeatureVector pub_feat(const ResearcherSnapshot& s) {
  int total = 0, with_pub = 0, max_single = 0;
  for (const auto& pg : s.prior_grants) {
    total += pg.publication_count;
    if (pg.publication_count >= 1) ++with_pub;
    max_single = std::max(max_single, pg.publication_count);
  }
  const double n = static_cast<double>(s.prior_grants.size());
  FeatureVector v;
  v.append(Family::PubFeat, "pubFeat.total_publications", total);
  v.append(Family::PubFeat, "pubFeat.grants_with_publication", with_pub);
  v.append(Family::PubFeat, "pubFeat.max_publications_single_grant", max_single);
  v.append(Family::PubFeat, "pubFeat.mean_publications_per_grant", n > 0 ? total / n : 0.0);
  v.append(Family::PubFeat, "pubFeat.fraction_productive_grants", n > 0 ? with_pub / n : 0.0);
  return v;
}

FeatureVector pub_cit_feat(const ResearcherSnapshot& s, int cutoff_year) {
  int articles = static_cast<int>(s.prior_publications.size());
  int citations = 0;
  int first_year = 0;
  for (const auto& p : s.prior_publications) {
    citations += p.citation_count;
    first_year = first_year == 0 ? p.year : std::min(first_year, p.year);
  }
  double per_year_articles = 0, per_year_citations = 0;
  if (articles > 0) {
    const double span = std::max(1, cutoff_year - first_year);
    per_year_articles = articles / span;
    per_year_citations = citations / span;
  }
  FeatureVector v;
  v.append(Family::PubCitFeat, "pubCitFeat.total_articles", articles);
  v.append(Family::PubCitFeat, "pubCitFeat.total_citations", citations);
  v.append(Family::PubCitFeat, "pubCitFeat.articles_per_year", per_year_articles);
  v.append(Family::PubCitFeat, "pubCitFeat.citations_per_year", per_year_citations);
  return v;
}

FeatureVector grnt_feat(const ResearcherSnapshot& s) {
  FeatureVector v;
  v.append(Family::GrntFeat, "grntFeat.prior_grants", static_cast<double>(s.prior_grants.size()));
  v.append(Family::GrntFeat, "grntFeat.undergrad_scholarships", s.scholarship_counts[0]);
  v.append(Family::GrntFeat, "grntFeat.masters_scholarships", s.scholarship_counts[1]);
  v.append(Family::GrntFeat, "grntFeat.doctoral_scholarships", s.scholarship_counts[2]);
  v.append(Family::GrntFeat, "grntFeat.postdoc_scholarships", s.scholarship_counts[3]);
  return v;
}

FeatureVector area_feat(const ResearcherSnapshot& s, const AreaTaxonomy& taxonomy) {
  std::set<std::string> l1, l2, l3;
  for (const auto& code : s.area_codes) {
    const auto& entry = taxonomy.resolve(code);
    l3.insert(code);
    l2.insert(entry.level2);
    l1.insert(entry.level1);
  }
  FeatureVector v;
  v.append(Family::AreaFeat, "areaFeat.level1_areas", static_cast<double>(l1.size()));
  v.append(Family::AreaFeat, "areaFeat.level2_areas", static_cast<double>(l2.size()));
  v.append(Family::AreaFeat, "areaFeat.level3_areas", static_cast<double>(l3.size()));
  return v;
}

FeatureVector collab_feat(const ResearcherSnapshot& s) {
  int grants_with_assoc = 0;
  for (const auto& pg : s.prior_grants) {
    if (pg.associated_researcher_count >= 1) ++grants_with_assoc;
  }
  int total_coauthor_slots = 0;
  for (const auto& p : s.prior_publications) total_coauthor_slots += p.coauthor_count;
  const double n_articles = static_cast<double>(s.prior_publications.size());
  FeatureVector v;
  v.append(Family::CollabFeat, "collabFeat.local_collaborators",
           static_cast<double>(s.local_collaborators.size()));
  v.append(Family::CollabFeat, "collabFeat.abroad_collaborators",
           static_cast<double>(s.abroad_collaborators.size()));
  v.append(Family::CollabFeat, "collabFeat.grants_with_associates", grants_with_assoc);
  v.append(Family::CollabFeat, "collabFeat.distinct_coauthors",
           static_cast<double>(s.distinct_coauthors.size()));
  v.append(Family::CollabFeat, "collabFeat.mean_coauthors_per_article",
           n_articles > 0 ? total_coauthor_slots / n_articles : 0.0);
  return v;
}

FeatureVector inst_feat_a(const ResearcherSnapshot& s, const InstitutionStats& stats) {
  const InstitutionRecord& rec = stats.at(s.institution_id);
  FeatureVector v;
  v.append(Family::InstFeatA, "instFeatA.hosted_grants", rec.hosted_grant_count);
  v.append(Family::InstFeatA, "instFeatA.publications", rec.publication_count);
  v.append(Family::InstFeatA, "instFeatA.productive_grants", rec.productive_grant_count);
  return v;
}

FeatureVector inst_feat_b(const ResearcherSnapshot& s,
                          const std::vector<std::string>& institution_index) {
  FeatureVector v;
  bool found = false;
  for (const auto& id : institution_index) {
    const bool hit = id == s.institution_id;
    found = found || hit;
    v.append(Family::InstFeatB, "instFeatB.onehot[" + id + "]", hit ? 1.0 : 0.0);
  }
  if (!found) {
    fail(ErrorCode::UnknownInstitution, "institution not in index: '" + s.institution_id + "'");
  }
  return v;
}

FeatureVector inst_feat_c(const ResearcherSnapshot& s,
                          const std::vector<std::string>& institution_index,
                          const InstitutionStats& stats) {
  FeatureVector v;
  bool found = false;
  for (const auto& id : institution_index) {
    const bool hit = id == s.institution_id;
    found = found || hit;
    v.append(Family::InstFeatC, "instFeatC.success_rate[" + id + "]",
             hit ? stats.at(id).success_rate() : 0.0);
  }
  if (!found) {
    fail(ErrorCode::UnknownInstitution, "institution not in index: '" + s.institution_id + "'");
  }
  return v;
}

double subject_success_rate(const std::string& subject, const std::vector<const Grant*>& grants,
                            int threshold) {
  int total = 0, productive = 0;
  for (const Grant* g : grants) {
    bool mentions = false;
    for (const auto& kw : g->keywords) {
      if (normalize_subject(kw) == subject) {
        mentions = true;
        break;
      }
    }
    if (!mentions) continue;
    ++total;
    if (label_grant(*g, threshold) == Label::Productive) ++productive;
  }
  return total > 0 ? static_cast<double>(productive) / total : 0.0;
}

namespace {

std::vector<double> subject_rates(const ResearcherSnapshot& s, const SubjectStats& stats) {
  std::vector<double> rates;
  rates.reserve(s.subject_counts.size());
  for (const auto& [subject, count] : s.subject_counts) rates.push_back(stats.rate(subject));
  return rates;
}

}  // namespace

FeatureVector subj_feat_a(const ResearcherSnapshot& s, const SubjectStats& global_stats,
                          const SubjectStats& local_stats) {
  Summary g = summarize(subject_rates(s, global_stats));
  Summary l = summarize(subject_rates(s, local_stats));
  FeatureVector v;
  v.append(Family::SubjFeatA, "subjFeatA.global_mean", g.mean);
  v.append(Family::SubjFeatA, "subjFeatA.global_std", g.stddev);
  v.append(Family::SubjFeatA, "subjFeatA.global_max", g.max);
  v.append(Family::SubjFeatA, "subjFeatA.local_mean", l.mean);
  v.append(Family::SubjFeatA, "subjFeatA.local_std", l.stddev);
  v.append(Family::SubjFeatA, "subjFeatA.local_max", l.max);
  return v;
}

std::vector<std::string> top_subjects(const std::map<std::string, int>& counts, int k) {
  std::vector<std::pair<std::string, int>> items(counts.begin(), counts.end());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;  // frequency ties: lexicographic
  });
  std::vector<std::string> out;
  for (const auto& [subject, count] : items) {
    if (static_cast<int>(out.size()) >= k) break;
    out.push_back(subject);
  }
  return out;
}

FeatureVector subj_feat_b(const ResearcherSnapshot& s, const SubjectStats& global_stats,
                          const SubjectStats& local_stats, int k) {
  if (k < 1) fail(ErrorCode::InvalidConfig, "subjFeatB k must be >= 1");
  const auto subjects = top_subjects(s.subject_counts, k);
  FeatureVector v;
  for (int i = 0; i < k; ++i) {
    const double rate = i < static_cast<int>(subjects.size()) ? global_stats.rate(subjects[i]) : 0.0;
    v.append(Family::SubjFeatB, "subjFeatB.global[" + std::to_string(i) + "]", rate);
  }
  for (int i = 0; i < k; ++i) {
    const double rate = i < static_cast<int>(subjects.size()) ? local_stats.rate(subjects[i]) : 0.0;
    v.append(Family::SubjFeatB, "subjFeatB.local[" + std::to_string(i) + "]", rate);
  }
  return v;
}

FeatureVector subj_feat_c(const ResearcherSnapshot& s) {
  std::vector<double> counts;
  counts.reserve(s.subject_counts.size());
  for (const auto& [subject, count] : s.subject_counts) counts.push_back(count);
  Summary c = summarize(counts);
  FeatureVector v;
  v.append(Family::SubjFeatC, "subjFeatC.count_mean", c.mean);
  v.append(Family::SubjFeatC, "subjFeatC.count_std", c.stddev);
  v.append(Family::SubjFeatC, "subjFeatC.count_max", c.max);
  return v;
}

SubjectStats compute_subject_stats(const GrantCorpus& corpus, const Date* cutoff, int threshold) {
  SubjectStats stats;
  stats.scope = StatsScope::Global;
  for (const auto& [id, g] : corpus.grants) {
    if (cutoff && !(g.end_date() < *cutoff)) continue;
    const bool productive = label_grant(g, threshold) == Label::Productive;
    std::set<std::string> subjects;
    for (const auto& kw : g.keywords) {
      std::string subject = normalize_subject(kw);
      if (!subject.empty()) subjects.insert(subject);
    }
    for (const auto& subject : subjects) {
      auto& rec = stats.by_subject[subject];
      rec.grant_count += 1;
      if (productive) rec.productive_count += 1;
    }
  }
  return stats;
}

SubjectStats compute_local_subject_stats(const ResearcherSnapshot& s, int threshold) {
  SubjectStats stats;
  stats.scope = StatsScope::LocalToResearcher;
  for (const auto& pg : s.prior_grants) {
    const bool productive = pg.publication_count >= threshold;
    std::set<std::string> subjects;
    for (const auto& kw : pg.grant->keywords) {
      std::string subject = normalize_subject(kw);
      if (!subject.empty()) subjects.insert(subject);
    }
    for (const auto& subject : subjects) {
      auto& rec = stats.by_subject[subject];
      rec.grant_count += 1;
      if (productive) rec.productive_count += 1;
    }
  }
  return stats;
}

InstitutionStats compute_institution_stats(const GrantCorpus& corpus, const Date* cutoff,
                                           int threshold) {
  InstitutionStats stats;
  for (const auto& [id, g] : corpus.grants) {
    if (cutoff && !(g.end_date() < *cutoff)) continue;
    auto& rec = stats.by_institution[g.host_institution_id];
    rec.hosted_grant_count += 1;
    rec.publication_count += static_cast<int>(g.publication_ids.size());
    if (label_grant(g, threshold) == Label::Productive) rec.productive_grant_count += 1;
  }
  return stats;
}

std::string FeatureMatrix::to_csv() const {
  std::ostringstream out;
  for (const auto& name : column_names) out << name << ",";
  out << "label,grant_id\n";
  for (std::size_t i = 0; i < rows(); ++i) {
    const double* r = row(i);
    for (std::size_t j = 0; j < cols(); ++j) out << format_value(r[j]) << ",";
    out << label_name(labels[i]) << "," << instance_ids[i] << "\n";
  }
  return out.str();
}

FeatureMatrix assemble(const GrantCorpus& corpus, ResearchField field,
                       const AssembleOptions& options) {
  if (options.families.empty()) fail(ErrorCode::UnknownFamily, "no feature families requested");

  const auto targets = eligible_grants(corpus, field, options.window);
  int positives = 0, negatives = 0;
  for (const Grant* g : targets) {
    (label_grant(*g, options.productivity_threshold) == Label::Productive ? positives : negatives)++;
  }
  if (positives < 2 || negatives < 2) {
    fail(ErrorCode::InsufficientData,
         "field " + field_name(field) + " needs >= 2 instances of each class, got " +
             std::to_string(positives) + "/" + std::to_string(negatives));
  }

  SubjectStats paper_subject_stats;
  InstitutionStats paper_institution_stats;
  if (options.paper_mode) {
    paper_subject_stats = compute_subject_stats(corpus, nullptr, options.productivity_threshold);
    paper_institution_stats =
        compute_institution_stats(corpus, nullptr, options.productivity_threshold);
  }

  FeatureMatrix m;
  bool first_row = true;
  for (const Grant* g : targets) {
    const Date cutoff = g->start_date;
    ResearcherSnapshot s = snapshot(corpus, g->pi_id, cutoff);

    SubjectStats global_stats;
    InstitutionStats inst_stats;
    SubjectStats local_stats;
    if (options.paper_mode) {
      global_stats = paper_subject_stats;
      inst_stats = paper_institution_stats;
      // Paper scope: the PI's whole grant history, target included.
      SubjectStats ls;
      ls.scope = StatsScope::LocalToResearcher;
      const Researcher& pi = corpus.researchers.at(g->pi_id);
      for (const auto& gid : pi.grant_ids) {
        const Grant& pg = corpus.grants.at(gid);
        const bool productive =
            label_grant(pg, options.productivity_threshold) == Label::Productive;
        std::set<std::string> subjects;
        for (const auto& kw : pg.keywords) {
          std::string subject = normalize_subject(kw);
          if (!subject.empty()) subjects.insert(subject);
        }
        for (const auto& subject : subjects) {
          auto& rec = ls.by_subject[subject];
          rec.grant_count += 1;
          if (productive) rec.productive_count += 1;
        }
      }
      local_stats = std::move(ls);
    } else {
      global_stats = compute_subject_stats(corpus, &cutoff, options.productivity_threshold);
      inst_stats = compute_institution_stats(corpus, &cutoff, options.productivity_threshold);
      local_stats = compute_local_subject_stats(s, options.productivity_threshold);
    }

    FeatureVector row;
    for (Family f : all_families()) {
      if (!options.families.count(f)) continue;
      FeatureVector part;
      switch (f) {
        case Family::PubFeat: part = pub_feat(s); break;
        case Family::PubCitFeat: part = pub_cit_feat(s, cutoff.year); break;
        case Family::GrntFeat: part = grnt_feat(s); break;
        case Family::AreaFeat: part = area_feat(s, corpus.taxonomy); break;
        case Family::CollabFeat: part = collab_feat(s); break;
        case Family::InstFeatA: part = inst_feat_a(s, inst_stats); break;
        case Family::InstFeatB: part = inst_feat_b(s, corpus.institution_index); break;
        case Family::InstFeatC:
          part = inst_feat_c(s, corpus.institution_index, inst_stats);
          break;
        case Family::SubjFeatA: part = subj_feat_a(s, global_stats, local_stats); break;
        case Family::SubjFeatB:
          part = subj_feat_b(s, global_stats, local_stats, options.subj_b_k);
          break;
        case Family::SubjFeatC: part = subj_feat_c(s); break;
      }
      for (std::size_t i = 0; i < part.names.size(); ++i) {
        row.append(part.family_tags[i], part.names[i], part.values[i]);
      }
    }
    for (double v : row.values) {
      if (!std::isfinite(v)) {
        fail(ErrorCode::DegenerateData, "non-finite feature value for grant " + g->id);
      }
    }

    if (first_row) {
      m.column_names = row.names;
      m.column_families = row.family_tags;
      first_row = false;
    }
    m.values.insert(m.values.end(), row.values.begin(), row.values.end());
    m.labels.push_back(label_grant(*g, options.productivity_threshold));
    m.instance_ids.push_back(g->id);
  }
  return m;
}

}  // namespace grantprod
