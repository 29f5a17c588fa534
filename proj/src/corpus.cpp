#include "grantprod/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace grantprod {

using nlohmann::json;

ResearchField parse_field(const std::string& s) {
  if (s == "MED" || s == "med") return ResearchField::MED;
  if (s == "DENT" || s == "dent") return ResearchField::DENT;
  if (s == "VET" || s == "vet") return ResearchField::VET;
  if (s == "OTHER" || s == "other") return ResearchField::OTHER;
  fail(ErrorCode::ParseError, "unknown field: '" + s + "'");
}

std::string field_name(ResearchField f) {
  switch (f) {
    case ResearchField::MED: return "MED";
    case ResearchField::DENT: return "DENT";
    case ResearchField::VET: return "VET";
    default: return "OTHER";
  }
}

const AreaTaxonomy::Entry& AreaTaxonomy::resolve(const std::string& level3) const {
  auto it = by_level3.find(level3);
  if (it == by_level3.end()) {
    fail(ErrorCode::UnknownAreaCode, "unknown area code: '" + level3 + "'");
  }
  return it->second;
}

std::size_t GrantCorpus::institution_position(const std::string& id) const {
  auto it = std::lower_bound(institution_index.begin(), institution_index.end(), id);
  if (it == institution_index.end() || *it != id) {
    fail(ErrorCode::UnknownInstitution, "institution not indexed: '" + id + "'");
  }
  return static_cast<std::size_t>(it - institution_index.begin());
}

std::string normalize_subject(const std::string& raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (unsigned char c : raw) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
  }
  return out;
}

namespace {

bool valid_grant_id(const std::string& id) {
  // "yyyy/nnnnn-d"
  if (id.size() != 12 || id[4] != '/' || id[10] != '-') return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 7u, 8u, 9u, 11u}) {
    if (!std::isdigit(static_cast<unsigned char>(id[i]))) return false;
  }
  return true;
}

std::string warn_at(const std::string& file, std::size_t line, const std::string& msg) {
  return file + ":" + std::to_string(line) + ": " + msg;
}

// Parses one record per line; empty lines ignored.
template <typename Fn>
void for_each_record(const std::string& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path + "'");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const std::exception& e) {
      fail(ErrorCode::ParseError, warn_at(path, lineno, e.what()));
    }
    try {
      fn(record, lineno);
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      fail(ErrorCode::ParseError, warn_at(path, lineno, e.what()));
    }
  }
}

ScholarshipKind parse_scholarship_kind(const std::string& s) {
  for (int i = 0; i < 4; ++i) {
    if (s == kScholarshipKindNames[i]) return static_cast<ScholarshipKind>(i);
  }
  fail(ErrorCode::ParseError, "unknown scholarship kind: '" + s + "'");
}

}  // namespace

GrantCorpus load_corpus(const CorpusPaths& paths) {
  GrantCorpus corpus;
  IngestionReport& report = corpus.ingestion;

  for_each_record(paths.institutions, [&](const json& r, std::size_t line) {
    Institution inst;
    inst.id = r.at("id").get<std::string>();
    inst.name = r.value("name", inst.id);
    inst.is_local = r.value("is_local", true);
    if (!corpus.institutions.emplace(inst.id, inst).second) {
      fail(ErrorCode::DuplicateId, warn_at(paths.institutions, line, "duplicate id " + inst.id));
    }
  });

  for_each_record(paths.taxonomy, [&](const json& r, std::size_t line) {
    const auto level3 = r.at("level3").get<std::string>();
    AreaTaxonomy::Entry entry{r.at("level2").get<std::string>(), r.at("level1").get<std::string>()};
    if (!corpus.taxonomy.by_level3.emplace(level3, entry).second) {
      fail(ErrorCode::DuplicateId, warn_at(paths.taxonomy, line, "duplicate area " + level3));
    }
  });

  for_each_record(paths.publications, [&](const json& r, std::size_t line) {
    Publication pub;
    pub.id = r.at("id").get<std::string>();
    pub.year = r.at("year").get<int>();
    pub.citation_count = r.at("citation_count").get<int>();
    if (r.contains("coauthor_ids")) pub.coauthor_ids = r.at("coauthor_ids").get<std::vector<std::string>>();
    if (r.contains("institution_id") && !r.at("institution_id").is_null()) {
      pub.institution_id = r.at("institution_id").get<std::string>();
    }
    if (pub.year < 1900 || pub.citation_count < 0) {
      fail(ErrorCode::ParseError, warn_at(paths.publications, line, "invalid publication " + pub.id));
    }
    if (!corpus.publications.emplace(pub.id, pub).second) {
      fail(ErrorCode::DuplicateId, warn_at(paths.publications, line, "duplicate id " + pub.id));
    }
  });

  for_each_record(paths.researchers, [&](const json& r, std::size_t line) {
    Researcher res;
    res.id = r.at("id").get<std::string>();
    res.institution_id = r.at("institution_id").get<std::string>();
    if (r.contains("grant_ids")) res.grant_ids = r.at("grant_ids").get<std::vector<std::string>>();
    if (r.contains("publication_ids")) {
      res.publication_ids = r.at("publication_ids").get<std::vector<std::string>>();
    }
    if (r.contains("area_codes")) res.area_codes = r.at("area_codes").get<std::vector<std::string>>();
    if (r.contains("scholarship_counts")) {
      for (const auto& [kind_name, dates] : r.at("scholarship_counts").items()) {
        ScholarshipKind kind = parse_scholarship_kind(kind_name);
        for (const auto& date : dates) {
          res.scholarships.push_back({kind, parse_date(date.get<std::string>())});
        }
      }
    }
    if (!corpus.researchers.emplace(res.id, res).second) {
      fail(ErrorCode::DuplicateId, warn_at(paths.researchers, line, "duplicate id " + res.id));
    }
  });

  for_each_record(paths.grants, [&](const json& r, std::size_t line) {
    Grant g;
    g.id = r.at("id").get<std::string>();
    if (!valid_grant_id(g.id)) {
      fail(ErrorCode::ParseError, warn_at(paths.grants, line, "grant id not yyyy/nnnnn-d: " + g.id));
    }
    g.pi_id = r.at("pi_id").get<std::string>();
    g.field = parse_field(r.at("field").get<std::string>());
    g.start_date = parse_date(r.at("start_date").get<std::string>());
    g.duration_months = r.at("duration_months").get<int>();
    if (g.duration_months < 1) {
      fail(ErrorCode::ParseError, warn_at(paths.grants, line, "duration_months < 1 in " + g.id));
    }
    if (r.contains("keywords")) g.keywords = r.at("keywords").get<std::vector<std::string>>();
    if (r.contains("publication_ids")) {
      g.publication_ids = r.at("publication_ids").get<std::vector<std::string>>();
    }
    if (r.contains("associated_researcher_ids")) {
      g.associated_researcher_ids = r.at("associated_researcher_ids").get<std::vector<std::string>>();
    }
    g.associated_researcher_count =
        r.value("associated_researcher_count", static_cast<int>(g.associated_researcher_ids.size()));
    g.host_institution_id = r.at("host_institution_id").get<std::string>();

    bool any_keyword = false;
    for (const auto& k : g.keywords) {
      if (!normalize_subject(k).empty()) any_keyword = true;
    }
    if (!any_keyword) {
      g.degenerate = true;
      report.warnings.push_back(warn_at(paths.grants, line, "grant " + g.id + " has no usable keywords"));
    }
    if (!corpus.grants.emplace(g.id, g).second) {
      fail(ErrorCode::DuplicateId, warn_at(paths.grants, line, "duplicate id " + g.id));
    }
  });

  // Referential integrity.
  for (const auto& [id, g] : corpus.grants) {
    if (!corpus.researchers.count(g.pi_id)) {
      fail(ErrorCode::DanglingReference, "grant " + id + " references unknown PI " + g.pi_id);
    }
    if (!corpus.institutions.count(g.host_institution_id)) {
      fail(ErrorCode::DanglingReference,
           "grant " + id + " references unknown institution " + g.host_institution_id);
    }
    for (const auto& pid : g.publication_ids) {
      if (!corpus.publications.count(pid)) {
        fail(ErrorCode::DanglingReference, "grant " + id + " references unknown publication " + pid);
      }
    }
  }
  for (const auto& [id, res] : corpus.researchers) {
    if (!corpus.institutions.count(res.institution_id)) {
      fail(ErrorCode::DanglingReference,
           "researcher " + id + " references unknown institution " + res.institution_id);
    }
    for (const auto& gid : res.grant_ids) {
      if (!corpus.grants.count(gid)) {
        fail(ErrorCode::DanglingReference, "researcher " + id + " references unknown grant " + gid);
      }
    }
    for (const auto& pid : res.publication_ids) {
      if (!corpus.publications.count(pid)) {
        fail(ErrorCode::DanglingReference, "researcher " + id + " references unknown publication " + pid);
      }
    }
  }

  corpus.institution_index.reserve(corpus.institutions.size());
  for (const auto& [id, inst] : corpus.institutions) corpus.institution_index.push_back(id);
  // std::map iteration is already lexicographically sorted.

  report.grant_count = corpus.grants.size();
  report.researcher_count = corpus.researchers.size();
  report.publication_count = corpus.publications.size();
  report.institution_count = corpus.institutions.size();
  report.taxonomy_count = corpus.taxonomy.by_level3.size();
  return corpus;
}

std::string IngestionReport::to_text() const {
  std::ostringstream out;
  out << "ingestion report\n"
      << "  grants:       " << grant_count << "\n"
      << "  researchers:  " << researcher_count << "\n"
      << "  publications: " << publication_count << "\n"
      << "  institutions: " << institution_count << "\n"
      << "  areas:        " << taxonomy_count << "\n"
      << "  warnings:     " << warnings.size() << "\n";
  for (const auto& w : warnings) out << "    " << w << "\n";
  return out.str();
}

namespace {

void write_lines(const std::string& path, const std::vector<json>& records) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write '" + path + "'");
  for (const auto& r : records) out << r.dump() << "\n";
}

}  // namespace

void serialize_corpus(const GrantCorpus& corpus, const CorpusPaths& paths) {
  std::vector<json> records;

  for (const auto& [id, g] : corpus.grants) {
    json r{{"id", g.id},
           {"pi_id", g.pi_id},
           {"field", field_name(g.field)},
           {"start_date", format_date(g.start_date)},
           {"duration_months", g.duration_months},
           {"keywords", g.keywords},
           {"publication_ids", g.publication_ids},
           {"associated_researcher_ids", g.associated_researcher_ids},
           {"associated_researcher_count", g.associated_researcher_count},
           {"host_institution_id", g.host_institution_id}};
    records.push_back(std::move(r));
  }
  write_lines(paths.grants, records);

  records.clear();
  for (const auto& [id, res] : corpus.researchers) {
    json scholarships = json::object();
    for (const auto& ev : res.scholarships) {
      scholarships[kScholarshipKindNames[static_cast<int>(ev.kind)]].push_back(format_date(ev.date));
    }
    records.push_back(json{{"id", res.id},
                           {"institution_id", res.institution_id},
                           {"grant_ids", res.grant_ids},
                           {"publication_ids", res.publication_ids},
                           {"scholarship_counts", scholarships},
                           {"area_codes", res.area_codes}});
  }
  write_lines(paths.researchers, records);

  records.clear();
  for (const auto& [id, pub] : corpus.publications) {
    json r{{"id", pub.id},
           {"year", pub.year},
           {"citation_count", pub.citation_count},
           {"coauthor_ids", pub.coauthor_ids}};
    if (pub.institution_id) r["institution_id"] = *pub.institution_id;
    records.push_back(std::move(r));
  }
  write_lines(paths.publications, records);

  records.clear();
  for (const auto& [id, inst] : corpus.institutions) {
    records.push_back(json{{"id", inst.id}, {"name", inst.name}, {"is_local", inst.is_local}});
  }
  write_lines(paths.institutions, records);

  records.clear();
  for (const auto& [level3, entry] : corpus.taxonomy.by_level3) {
    records.push_back(json{{"level3", level3}, {"level2", entry.level2}, {"level1", entry.level1}});
  }
  write_lines(paths.taxonomy, records);
}

Label label_grant(const Grant& grant, int threshold) {
  return static_cast<int>(grant.publication_ids.size()) >= threshold ? Label::Productive
                                                                     : Label::Unproductive;
}

ResearcherSnapshot snapshot(const GrantCorpus& corpus, const std::string& researcher_id,
                            const Date& cutoff_date) {
  auto rit = corpus.researchers.find(researcher_id);
  if (rit == corpus.researchers.end()) {
    fail(ErrorCode::UnknownResearcher, "unknown researcher: '" + researcher_id + "'");
  }
  const Researcher& res = rit->second;

  ResearcherSnapshot s;
  s.researcher_id = researcher_id;
  s.cutoff_date = cutoff_date;
  s.institution_id = res.institution_id;
  s.area_codes = res.area_codes;

  std::vector<const Grant*> prior;
  for (const auto& gid : res.grant_ids) {
    const Grant& g = corpus.grants.at(gid);
    if (g.start_date < cutoff_date) prior.push_back(&g);  // strict cutoff
  }
  std::sort(prior.begin(), prior.end(), [](const Grant* a, const Grant* b) {
    return std::tie(a->start_date, a->id) < std::tie(b->start_date, b->id);
  });
  for (const Grant* g : prior) {
    s.prior_grants.push_back({g, static_cast<int>(g->publication_ids.size()),
                              g->associated_researcher_count});
    for (const auto& kw : g->keywords) {
      std::string subject = normalize_subject(kw);
      if (!subject.empty()) s.subject_counts[subject] += 1;
    }
    for (const auto& cid : g->associated_researcher_ids) {
      auto cit = corpus.researchers.find(cid);
      bool local = false;
      if (cit != corpus.researchers.end()) {
        auto iit = corpus.institutions.find(cit->second.institution_id);
        local = iit != corpus.institutions.end() && iit->second.is_local;
      }
      (local ? s.local_collaborators : s.abroad_collaborators).insert(cid);
    }
  }

  std::vector<const Publication*> pubs;
  for (const auto& pid : res.publication_ids) {
    const Publication& p = corpus.publications.at(pid);
    if (p.year < cutoff_date.year) pubs.push_back(&p);
  }
  std::sort(pubs.begin(), pubs.end(), [](const Publication* a, const Publication* b) {
    return std::tie(a->year, a->id) < std::tie(b->year, b->id);
  });
  for (const Publication* p : pubs) {
    s.prior_publications.push_back({p->year, p->citation_count, static_cast<int>(p->coauthor_ids.size())});
    for (const auto& ca : p->coauthor_ids) s.distinct_coauthors.insert(ca);
  }

  for (const auto& ev : res.scholarships) {
    if (ev.date < cutoff_date) s.scholarship_counts[static_cast<int>(ev.kind)] += 1;
  }
  return s;
}

std::vector<const Grant*> eligible_grants(const GrantCorpus& corpus, ResearchField field,
                                          const EligibilityWindow& window) {
  std::vector<const Grant*> out;
  for (const auto& [id, g] : corpus.grants) {
    if (g.field != field) continue;
    if (!(g.start_date < window.start_before)) continue;
    if (g.duration_months < window.min_duration_months ||
        g.duration_months > window.max_duration_months) {
      continue;
    }
    out.push_back(&g);
  }
  return out;  // map order: sorted by grant id
}

}  // namespace grantprod
