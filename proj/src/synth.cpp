#include "grantprod/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include <json.hpp>

#include "grantprod/rng.hpp"

namespace grantprod {

using nlohmann::json;

void GeneratorConfig::validate() const {
  auto bad = [](const std::string& msg) { fail(ErrorCode::InvalidConfig, msg); };
  if (researchers < 1 || institutions < 1 || subjects < 2 || grants_per_field < 1) {
    bad("counts must be positive (and subjects >= 2)");
  }
  if (abroad_institutions < 0 || abroad_institutions >= institutions) {
    bad("abroad_institutions must leave at least one local institution");
  }
  if (fields.empty()) bad("at least one target field required");
  if (history_grants_min < 0 || history_grants_max < history_grants_min) {
    bad("invalid history grant range");
  }
  if (subj_b_k < 1) bad("subj_b_k must be >= 1");
  if (productivity_threshold < 1) bad("productivity threshold must be >= 1");
  for (double q : {hot_subject_prevalence, strong_institution_fraction, prolific_fraction}) {
    if (q < 0 || q > 1) bad("prevalences must lie in [0, 1]");
  }
  if (base_positive_rate <= 0 || base_positive_rate >= 1) bad("base rate must be in (0, 1)");
  for (int mask = 0; mask < 8; ++mask) {
    const double p = base_positive_rate + ((mask & 1) ? subject_effect : 0.0) +
                     ((mask & 2) ? institution_effect : 0.0) +
                     ((mask & 4) ? publication_effect : 0.0);
    if (p <= 0 || p >= 1) bad("an effect-adjusted probability leaves (0, 1)");
  }
}

namespace {

json config_to_json(const GeneratorConfig& c) {
  std::vector<std::string> fields;
  for (ResearchField f : c.fields) fields.push_back(field_name(f));
  return json{{"seed", c.seed},
              {"researchers", c.researchers},
              {"institutions", c.institutions},
              {"abroad_institutions", c.abroad_institutions},
              {"subjects", c.subjects},
              {"grants_per_field", c.grants_per_field},
              {"fields", fields},
              {"base_positive_rate", c.base_positive_rate},
              {"subject_effect", c.subject_effect},
              {"hot_subject_prevalence", c.hot_subject_prevalence},
              {"institution_effect", c.institution_effect},
              {"strong_institution_fraction", c.strong_institution_fraction},
              {"publication_effect", c.publication_effect},
              {"prolific_fraction", c.prolific_fraction},
              {"history_grants_min", c.history_grants_min},
              {"history_grants_max", c.history_grants_max},
              {"subj_b_k", c.subj_b_k},
              {"productivity_threshold", c.productivity_threshold}};
}

GeneratorConfig config_from_json(const json& j) {
  GeneratorConfig c;
  c.seed = j.value("seed", c.seed);
  c.researchers = j.value("researchers", c.researchers);
  c.institutions = j.value("institutions", c.institutions);
  c.abroad_institutions = j.value("abroad_institutions", c.abroad_institutions);
  c.subjects = j.value("subjects", c.subjects);
  c.grants_per_field = j.value("grants_per_field", c.grants_per_field);
  if (j.contains("fields")) {
    c.fields.clear();
    for (const auto& f : j.at("fields")) c.fields.push_back(parse_field(f.get<std::string>()));
  }
  c.base_positive_rate = j.value("base_positive_rate", c.base_positive_rate);
  c.subject_effect = j.value("subject_effect", c.subject_effect);
  c.hot_subject_prevalence = j.value("hot_subject_prevalence", c.hot_subject_prevalence);
  c.institution_effect = j.value("institution_effect", c.institution_effect);
  c.strong_institution_fraction = j.value("strong_institution_fraction", c.strong_institution_fraction);
  c.publication_effect = j.value("publication_effect", c.publication_effect);
  c.prolific_fraction = j.value("prolific_fraction", c.prolific_fraction);
  c.history_grants_min = j.value("history_grants_min", c.history_grants_min);
  c.history_grants_max = j.value("history_grants_max", c.history_grants_max);
  c.subj_b_k = j.value("subj_b_k", c.subj_b_k);
  c.productivity_threshold = j.value("productivity_threshold", c.productivity_threshold);
  return c;
}

int strong_institution_count(const GeneratorConfig& c) {
  const int local = c.institutions - c.abroad_institutions;
  return std::min(local, static_cast<int>(std::lround(c.strong_institution_fraction * local)));
}

struct Branch {
  double probability;
  double positive_rate;
};

std::vector<Branch> effect_branches(const GeneratorConfig& c) {
  const int local = c.institutions - c.abroad_institutions;
  const double q_hot = c.hot_subject_prevalence;
  const double q_strong = local > 0 ? static_cast<double>(strong_institution_count(c)) / local : 0;
  const double q_prolific = c.prolific_fraction;
  std::vector<Branch> branches;
  for (int mask = 0; mask < 8; ++mask) {
    const double prob = ((mask & 1) ? q_hot : 1 - q_hot) *
                        ((mask & 2) ? q_strong : 1 - q_strong) *
                        ((mask & 4) ? q_prolific : 1 - q_prolific);
    const double p = c.base_positive_rate + ((mask & 1) ? c.subject_effect : 0.0) +
                     ((mask & 2) ? c.institution_effect : 0.0) +
                     ((mask & 4) ? c.publication_effect : 0.0);
    branches.push_back({prob, p});
  }
  return branches;
}

struct SynthPublication {
  std::string id;
  int year;
  int citations;
  std::vector<std::string> coauthors;
};

struct SynthHistGrant {
  std::string id;
  std::set<std::string> keywords;
  int publication_count = 0;
  std::vector<std::string> assoc_ids;
  bool productive = false;
};

struct SynthResearcher {
  std::string id;
  int institution = 0;
  std::string specialty;
  bool prolific = false;
  std::vector<std::string> area_codes;
  std::vector<SynthHistGrant> history;
  std::vector<SynthPublication> prior_pubs;  // year <= 2013, counted by features
  int scholarship_counts[4] = {0, 0, 0, 0};  // pre-cutoff events only
};

double population_std(const std::vector<double>& xs, double mean) {
  if (xs.empty()) return 0;
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size()));
}

}  // namespace

std::string GeneratorConfig::to_json() const { return config_to_json(*this).dump(); }

GeneratorConfig GeneratorConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    fail(ErrorCode::InvalidConfig, std::string("generator config: ") + e.what());
  }
  GeneratorConfig c = config_from_json(j);
  c.validate();
  return c;
}

double bayes_accuracy(const GeneratorConfig& config) {
  double acc = 0;
  for (const Branch& b : effect_branches(config)) {
    acc += b.probability * std::max(b.positive_rate, 1 - b.positive_rate);
  }
  return acc;
}

double expected_positive_rate(const GeneratorConfig& config) {
  double rate = 0;
  for (const Branch& b : effect_branches(config)) rate += b.probability * b.positive_rate;
  return rate;
}

SynthPaths SynthPaths::in_dir(const std::string& dir) {
  SynthPaths p;
  p.corpus.grants = dir + "/grants.jsonl";
  p.corpus.researchers = dir + "/researchers.jsonl";
  p.corpus.publications = dir + "/publications.jsonl";
  p.corpus.institutions = dir + "/institutions.jsonl";
  p.corpus.taxonomy = dir + "/taxonomy.jsonl";
  p.ground_truth = dir + "/ground_truth.jsonl";
  return p;
}

const GrantTruth& GroundTruth::at(const std::string& grant_id) const {
  auto it = by_grant.find(grant_id);
  if (it == by_grant.end()) fail(ErrorCode::UnknownGrant, "no ground truth for " + grant_id);
  return it->second;
}

GroundTruth generate(const GeneratorConfig& config, const SynthPaths& paths) {
  config.validate();
  Rng rng(config.seed);
  GrantCorpus corpus;

  char buf[64];
  const int n_local = config.institutions - config.abroad_institutions;
  const int n_strong = strong_institution_count(config);

  // Institutions: local ones first; a leading block of them is "strong".
  std::vector<std::string> inst_ids;
  for (int i = 0; i < config.institutions; ++i) {
    std::snprintf(buf, sizeof(buf), "I%04d", i);
    Institution inst;
    inst.id = buf;
    inst.name = "Institution " + std::to_string(i);
    inst.is_local = i < n_local;
    inst_ids.push_back(inst.id);
    corpus.institutions.emplace(inst.id, inst);
  }
  auto inst_is_strong = [&](int idx) { return idx < n_strong; };
  auto inst_is_local = [&](int idx) { return idx < n_local; };

  // Area taxonomy: 3 x 3 x 4 three-level hierarchy.
  std::vector<std::string> level3_codes;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      for (int c = 0; c < 4; ++c) {
        std::snprintf(buf, sizeof(buf), "l3-%d%d%d", a, b, c);
        std::string l3 = buf;
        corpus.taxonomy.by_level3[l3] = {"l2-" + std::to_string(a) + std::to_string(b),
                                         "l1-" + std::to_string(a)};
        level3_codes.push_back(l3);
      }
    }
  }

  std::vector<std::string> subject_pool;
  for (int i = 0; i < config.subjects; ++i) {
    std::snprintf(buf, sizeof(buf), "subject-%03d", i);
    subject_pool.push_back(buf);
  }
  const std::string hot_subject = subject_pool[0];

  auto pick_cold_subjects = [&](int count, const std::string& exclude) {
    std::set<std::string> out;
    while (static_cast<int>(out.size()) < count) {
      const auto& s = subject_pool[1 + rng.uniform_index(subject_pool.size() - 1)];
      if (s != exclude) out.insert(s);
    }
    return out;
  };

  std::vector<SynthResearcher> people(config.researchers);
  std::vector<std::string> researcher_ids;
  for (int i = 0; i < config.researchers; ++i) {
    std::snprintf(buf, sizeof(buf), "R%05d", i);
    auto& p = people[i];
    p.id = buf;
    researcher_ids.push_back(p.id);
    p.institution = static_cast<int>(rng.uniform_index(config.institutions));
    p.prolific = rng.bernoulli(config.prolific_fraction);
    if (rng.bernoulli(config.hot_subject_prevalence)) {
      p.specialty = hot_subject;
    } else {
      p.specialty = subject_pool[1 + rng.uniform_index(subject_pool.size() - 1)];
    }
    const int n_areas = 1 + static_cast<int>(rng.uniform_index(4));
    std::vector<std::string> codes = level3_codes;
    rng.shuffle(codes);
    codes.resize(n_areas);
    p.area_codes = codes;

    Researcher record;
    record.id = p.id;
    record.institution_id = inst_ids[p.institution];
    record.area_codes = p.area_codes;
    corpus.researchers.emplace(record.id, record);
  }

  auto pick_associates = [&](const std::string& self) {
    std::set<std::string> out;
    const int n = static_cast<int>(rng.uniform_index(4));  // 0..3
    while (static_cast<int>(out.size()) < n) {
      const auto& id = researcher_ids[rng.uniform_index(researcher_ids.size())];
      if (id != self) out.insert(id);
    }
    return std::vector<std::string>(out.begin(), out.end());
  };

  long long grant_serial = 0;
  auto next_grant_id = [&](int year) {
    ++grant_serial;
    std::snprintf(buf, sizeof(buf), "%04d/%05lld-%lld", year, grant_serial % 100000,
                  grant_serial % 10);
    return std::string(buf);
  };
  long long pub_serial = 0;
  auto next_pub_id = [&]() {
    ++pub_serial;
    std::snprintf(buf, sizeof(buf), "P%06lld", pub_serial);
    return std::string(buf);
  };

  auto add_publication = [&](SynthResearcher& p, int year, int citations, bool prior) {
    SynthPublication pub;
    pub.id = next_pub_id();
    pub.year = year;
    pub.citations = citations;
    const int n_co = static_cast<int>(rng.uniform_index(5));
    std::set<std::string> co;
    while (static_cast<int>(co.size()) < n_co) {
      const auto& id = researcher_ids[rng.uniform_index(researcher_ids.size())];
      if (id != p.id) co.insert(id);
    }
    pub.coauthors.assign(co.begin(), co.end());

    Publication record;
    record.id = pub.id;
    record.year = pub.year;
    record.citation_count = pub.citations;
    record.coauthor_ids = pub.coauthors;
    corpus.publications.emplace(record.id, record);
    corpus.researchers.at(p.id).publication_ids.push_back(pub.id);
    if (prior) p.prior_pubs.push_back(pub);
    return pub.id;
  };

  // Researcher histories: grants in 2000-2011 (18 months, never eligible),
  // publications through 2013, plus post-cutoff noise events that the
  // snapshot logic must exclude.
  for (auto& p : people) {
    const bool at_strong = inst_is_strong(p.institution);
    const int n_hist =
        rng.uniform_int(config.history_grants_min, config.history_grants_max);
    for (int h = 0; h < n_hist; ++h) {
      SynthHistGrant hist;
      const int year = 2000 + static_cast<int>(rng.uniform_index(12));
      hist.id = next_grant_id(year);
      hist.keywords = pick_cold_subjects(1 + static_cast<int>(rng.uniform_index(3)), p.specialty);
      hist.keywords.insert(p.specialty);
      hist.assoc_ids = pick_associates(p.id);

      const bool has_hot = hist.keywords.count(hot_subject) > 0;
      const double prob = config.base_positive_rate +
                          (has_hot ? config.subject_effect : 0.0) +
                          (at_strong ? config.institution_effect : 0.0);
      hist.productive = rng.bernoulli(prob);

      Grant g;
      g.id = hist.id;
      g.pi_id = p.id;
      g.field = ResearchField::OTHER;
      g.start_date = Date{year, rng.uniform_int(1, 12), rng.uniform_int(1, 28)};
      g.duration_months = 18;
      g.keywords.assign(hist.keywords.begin(), hist.keywords.end());
      g.associated_researcher_ids = hist.assoc_ids;
      g.associated_researcher_count = static_cast<int>(hist.assoc_ids.size());
      g.host_institution_id = inst_ids[p.institution];
      if (hist.productive) {
        const int n_pubs = rng.uniform_int(1, 3);
        for (int k = 0; k < n_pubs; ++k) {
          const int pub_year = std::min(year + 1 + static_cast<int>(rng.uniform_index(2)), 2013);
          g.publication_ids.push_back(
              add_publication(p, pub_year, static_cast<int>(rng.uniform_index(31)), true));
        }
      }
      hist.publication_count = static_cast<int>(g.publication_ids.size());
      corpus.grants.emplace(g.id, g);
      corpus.researchers.at(p.id).grant_ids.push_back(g.id);
      p.history.push_back(hist);
    }

    if (p.prolific) {
      const int extras = rng.uniform_int(8, 15);
      for (int k = 0; k < extras; ++k) {
        add_publication(p, 2003 + static_cast<int>(rng.uniform_index(11)),
                        static_cast<int>(rng.uniform_index(31)), true);
      }
    }

    for (int kind = 0; kind < 4; ++kind) {
      const int n = static_cast<int>(rng.uniform_index(4));
      p.scholarship_counts[kind] = n;
      for (int k = 0; k < n; ++k) {
        corpus.researchers.at(p.id).scholarships.push_back(
            {static_cast<ScholarshipKind>(kind),
             Date{2000 + static_cast<int>(rng.uniform_index(14)), rng.uniform_int(1, 12),
                  rng.uniform_int(1, 28)}});
      }
    }
    // Post-cutoff noise: excluded by the strict temporal cutoff.
    if (rng.uniform_index(2) == 0) {
      corpus.researchers.at(p.id).scholarships.push_back(
          {ScholarshipKind::Masters, Date{2016, 6, 15}});
    }
    if (rng.uniform_index(3) == 0) {
      add_publication(p, 2017, static_cast<int>(rng.uniform_index(5)), false);
    }
    if (rng.uniform_index(3) == 0) {
      Grant g;
      const int year = 2016;
      g.id = next_grant_id(year);
      g.pi_id = p.id;
      g.field = ResearchField::OTHER;
      g.start_date = Date{year, 6 + static_cast<int>(rng.uniform_index(6)), rng.uniform_int(1, 28)};
      g.duration_months = 18;
      auto kws = pick_cold_subjects(2, p.specialty);
      g.keywords.assign(kws.begin(), kws.end());
      g.host_institution_id = inst_ids[p.institution];
      corpus.grants.emplace(g.id, g);
      corpus.researchers.at(p.id).grant_ids.push_back(g.id);
    }
  }

  // Global success statistics over history grants; every history grant ends
  // by mid-2013, strictly before any target cutoff.
  std::map<std::string, std::pair<int, int>> subject_stats;  // subject -> (count, productive)
  std::map<int, std::array<int, 3>> inst_stats;  // inst -> (hosted, pubs, productive)
  for (const auto& p : people) {
    for (const auto& hist : p.history) {
      const bool productive = hist.publication_count >= config.productivity_threshold;
      for (const auto& s : hist.keywords) {
        auto& rec = subject_stats[s];
        rec.first += 1;
        if (productive) rec.second += 1;
      }
      auto& rec = inst_stats[p.institution];
      rec[0] += 1;
      rec[1] += hist.publication_count;
      if (productive) rec[2] += 1;
    }
  }
  auto global_rate = [&](const std::string& s) {
    auto it = subject_stats.find(s);
    if (it == subject_stats.end() || it->second.first == 0) return 0.0;
    return static_cast<double>(it->second.second) / it->second.first;
  };

  // Target PIs: distinct local researchers, one target grant each.
  std::vector<int> local_people;
  for (int i = 0; i < config.researchers; ++i) {
    if (inst_is_local(people[i].institution)) local_people.push_back(i);
  }
  const std::size_t needed = config.fields.size() * static_cast<std::size_t>(config.grants_per_field);
  if (local_people.size() < needed) {
    fail(ErrorCode::InvalidConfig,
         "not enough locally affiliated researchers for the requested target grants (" +
             std::to_string(local_people.size()) + " < " + std::to_string(needed) + ")");
  }
  rng.shuffle(local_people);

  GroundTruth truth;
  truth.config = config;
  truth.bayes_accuracy = bayes_accuracy(config);
  truth.expected_positive_rate = expected_positive_rate(config);

  std::size_t pi_cursor = 0;
  for (ResearchField field : config.fields) {
    for (int t = 0; t < config.grants_per_field; ++t) {
      SynthResearcher& p = people[local_people[pi_cursor++]];
      const bool hot = p.specialty == hot_subject;
      const bool strong = inst_is_strong(p.institution);
      const double prob = config.base_positive_rate + (hot ? config.subject_effect : 0.0) +
                          (strong ? config.institution_effect : 0.0) +
                          (p.prolific ? config.publication_effect : 0.0);
      const bool productive = rng.bernoulli(prob);

      Grant g;
      const int year = 2015;
      g.id = next_grant_id(year);
      g.pi_id = p.id;
      g.field = field;
      g.start_date = Date{year, rng.uniform_int(1, 12), rng.uniform_int(1, 28)};
      g.duration_months = rng.uniform_int(23, 24);
      auto kws = pick_cold_subjects(2, p.specialty);
      kws.insert(p.specialty);
      g.keywords.assign(kws.begin(), kws.end());
      g.associated_researcher_ids = pick_associates(p.id);
      g.associated_researcher_count = static_cast<int>(g.associated_researcher_ids.size());
      g.host_institution_id = inst_ids[p.institution];
      if (productive) {
        const int n_pubs = rng.uniform_int(1, 3);
        for (int k = 0; k < n_pubs; ++k) {
          g.publication_ids.push_back(
              add_publication(p, 2017, static_cast<int>(rng.uniform_index(10)), false));
        }
      }
      corpus.grants.emplace(g.id, g);
      corpus.researchers.at(p.id).grant_ids.push_back(g.id);

      // ---- independent feature bookkeeping -------------------------------
      GrantTruth gt;
      gt.grant_id = g.id;
      gt.field = field;
      gt.label_probability = prob;
      gt.label = productive ? Label::Productive : Label::Unproductive;
      gt.hot_subject = hot;
      gt.strong_institution = strong;
      gt.prolific = p.prolific;

      const int n_hist = static_cast<int>(p.history.size());
      {
        int total = 0, with_pub = 0, max_single = 0;
        for (const auto& h : p.history) {
          total += h.publication_count;
          if (h.publication_count >= 1) ++with_pub;
          max_single = std::max(max_single, h.publication_count);
        }
        gt.features["pubFeat"] = {
            static_cast<double>(total), static_cast<double>(with_pub),
            static_cast<double>(max_single),
            n_hist > 0 ? static_cast<double>(total) / n_hist : 0.0,
            n_hist > 0 ? static_cast<double>(with_pub) / n_hist : 0.0};
      }
      {
        int articles = static_cast<int>(p.prior_pubs.size()), citations = 0, first_year = 0;
        for (const auto& pub : p.prior_pubs) {
          citations += pub.citations;
          first_year = first_year == 0 ? pub.year : std::min(first_year, pub.year);
        }
        double per_a = 0, per_c = 0;
        if (articles > 0) {
          const double span = std::max(1, g.start_date.year - first_year);
          per_a = articles / span;
          per_c = citations / span;
        }
        gt.features["pubCitFeat"] = {static_cast<double>(articles),
                                     static_cast<double>(citations), per_a, per_c};
      }
      gt.features["grntFeat"] = {static_cast<double>(n_hist),
                                 static_cast<double>(p.scholarship_counts[0]),
                                 static_cast<double>(p.scholarship_counts[1]),
                                 static_cast<double>(p.scholarship_counts[2]),
                                 static_cast<double>(p.scholarship_counts[3])};
      {
        std::set<std::string> l1, l2;
        for (const auto& code : p.area_codes) {
          const auto& e = corpus.taxonomy.by_level3.at(code);
          l1.insert(e.level1);
          l2.insert(e.level2);
        }
        gt.features["areaFeat"] = {static_cast<double>(l1.size()), static_cast<double>(l2.size()),
                                   static_cast<double>(p.area_codes.size())};
      }
      {
        std::set<std::string> local_collab, abroad_collab, coauthors;
        int grants_with_assoc = 0, coauthor_slots = 0;
        for (const auto& h : p.history) {
          if (!h.assoc_ids.empty()) ++grants_with_assoc;
          for (const auto& id : h.assoc_ids) {
            const int idx = std::stoi(id.substr(1));
            (inst_is_local(people[idx].institution) ? local_collab : abroad_collab).insert(id);
          }
        }
        for (const auto& pub : p.prior_pubs) {
          coauthor_slots += static_cast<int>(pub.coauthors.size());
          for (const auto& id : pub.coauthors) coauthors.insert(id);
        }
        const double n_articles = static_cast<double>(p.prior_pubs.size());
        gt.features["collabFeat"] = {
            static_cast<double>(local_collab.size()), static_cast<double>(abroad_collab.size()),
            static_cast<double>(grants_with_assoc), static_cast<double>(coauthors.size()),
            n_articles > 0 ? coauthor_slots / n_articles : 0.0};
      }
      {
        const auto it = inst_stats.find(p.institution);
        const std::array<int, 3> rec = it == inst_stats.end() ? std::array<int, 3>{0, 0, 0}
                                                              : it->second;
        gt.features["instFeatA"] = {static_cast<double>(rec[0]), static_cast<double>(rec[1]),
                                    static_cast<double>(rec[2])};
        std::vector<double> onehot(config.institutions, 0.0);
        std::vector<double> rates(config.institutions, 0.0);
        onehot[p.institution] = 1.0;
        rates[p.institution] = rec[0] > 0 ? static_cast<double>(rec[2]) / rec[0] : 0.0;
        gt.features["instFeatB"] = onehot;
        gt.features["instFeatC"] = rates;
      }
      {
        // PI subject frequencies over history grants.
        std::map<std::string, int> freq;
        std::map<std::string, std::pair<int, int>> local;  // subject -> (count, productive)
        for (const auto& h : p.history) {
          const bool hp = h.publication_count >= config.productivity_threshold;
          for (const auto& s : h.keywords) {
            freq[s] += 1;
            auto& rec = local[s];
            rec.first += 1;
            if (hp) rec.second += 1;
          }
        }
        auto local_rate = [&](const std::string& s) {
          auto it = local.find(s);
          if (it == local.end() || it->second.first == 0) return 0.0;
          return static_cast<double>(it->second.second) / it->second.first;
        };
        std::vector<double> g_rates, l_rates, counts;
        for (const auto& [s, n] : freq) {
          g_rates.push_back(global_rate(s));
          l_rates.push_back(local_rate(s));
          counts.push_back(n);
        }
        auto mean_of = [](const std::vector<double>& xs) {
          if (xs.empty()) return 0.0;
          double s = 0;
          for (double x : xs) s += x;
          return s / static_cast<double>(xs.size());
        };
        auto max_of = [](const std::vector<double>& xs) {
          return xs.empty() ? 0.0 : *std::max_element(xs.begin(), xs.end());
        };
        const double gm = mean_of(g_rates), lm = mean_of(l_rates), cm = mean_of(counts);
        gt.features["subjFeatA"] = {gm, population_std(g_rates, gm), max_of(g_rates),
                                    lm, population_std(l_rates, lm), max_of(l_rates)};
        gt.features["subjFeatC"] = {cm, population_std(counts, cm), max_of(counts)};

        std::vector<std::pair<std::string, int>> ordered(freq.begin(), freq.end());
        std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
          if (a.second != b.second) return a.second > b.second;
          return a.first < b.first;
        });
        std::vector<double> sb(2 * config.subj_b_k, 0.0);
        for (int i = 0; i < config.subj_b_k && i < static_cast<int>(ordered.size()); ++i) {
          sb[i] = global_rate(ordered[i].first);
          sb[config.subj_b_k + i] = local_rate(ordered[i].first);
        }
        gt.features["subjFeatB"] = sb;
      }
      truth.by_grant.emplace(g.id, std::move(gt));
    }
  }

  serialize_corpus(corpus, paths.corpus);

  std::ofstream out(paths.ground_truth);
  if (!out) fail(ErrorCode::IoError, "cannot write '" + paths.ground_truth + "'");
  out << json{{"type", "meta"},
              {"bayes_accuracy", truth.bayes_accuracy},
              {"expected_positive_rate", truth.expected_positive_rate},
              {"config", config_to_json(config)}}
             .dump()
      << "\n";
  for (const auto& [id, gt] : truth.by_grant) {
    json features = json::object();
    for (const auto& [family, values] : gt.features) features[family] = values;
    out << json{{"type", "grant"},
                {"grant_id", gt.grant_id},
                {"field", field_name(gt.field)},
                {"label_probability", gt.label_probability},
                {"label", label_name(gt.label)},
                {"hot_subject", gt.hot_subject},
                {"strong_institution", gt.strong_institution},
                {"prolific", gt.prolific},
                {"features", features}}
               .dump()
        << "\n";
  }
  return truth;
}

GroundTruth load_ground_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path + "'");
  GroundTruth truth;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    if (j.at("type") == "meta") {
      truth.bayes_accuracy = j.at("bayes_accuracy").get<double>();
      truth.expected_positive_rate = j.at("expected_positive_rate").get<double>();
      truth.config = config_from_json(j.at("config"));
      continue;
    }
    GrantTruth gt;
    gt.grant_id = j.at("grant_id").get<std::string>();
    gt.field = parse_field(j.at("field").get<std::string>());
    gt.label_probability = j.at("label_probability").get<double>();
    gt.label = j.at("label").get<std::string>() == "Productive" ? Label::Productive
                                                                : Label::Unproductive;
    gt.hot_subject = j.at("hot_subject").get<bool>();
    gt.strong_institution = j.at("strong_institution").get<bool>();
    gt.prolific = j.at("prolific").get<bool>();
    for (const auto& [family, values] : j.at("features").items()) {
      gt.features[family] = values.get<std::vector<double>>();
    }
    truth.by_grant.emplace(gt.grant_id, std::move(gt));
  }
  return truth;
}

}  // namespace grantprod
