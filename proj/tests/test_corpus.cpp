#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "grantprod/corpus.hpp"

using namespace grantprod;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void append_line(const std::string& path, const std::string& line) {
  std::ofstream out(path, std::ios::app);
  out << line << "\n";
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

CorpusPaths paths_in(const fs::path& dir) {
  CorpusPaths p;
  p.grants = (dir / "grants.jsonl").string();
  p.researchers = (dir / "researchers.jsonl").string();
  p.publications = (dir / "publications.jsonl").string();
  p.institutions = (dir / "institutions.jsonl").string();
  p.taxonomy = (dir / "taxonomy.jsonl").string();
  return p;
}

GrantCorpus fixture_corpus() {
  GrantCorpus c;
  c.institutions.emplace("IA", Institution{"IA", "Alpha University", true});
  c.institutions.emplace("IB", Institution{"IB", "Beta Institute", false});

  c.taxonomy.by_level3["l3a"] = {"l2a", "l1a"};
  c.taxonomy.by_level3["l3b"] = {"l2b", "l1a"};

  Publication p1{"P1", 2010, 5, {"R2"}, std::nullopt};
  Publication p2{"P2", 2014, 3, {"R2", "R3"}, std::nullopt};
  Publication p3{"P3", 2016, 1, {}, std::nullopt};
  c.publications.emplace("P1", p1);
  c.publications.emplace("P2", p2);
  c.publications.emplace("P3", p3);

  Researcher r1;
  r1.id = "R1";
  r1.institution_id = "IA";
  r1.grant_ids = {"2009/00001-1", "2014/00002-2", "2015/00003-3", "2015/00004-4",
                  "2016/00005-5"};
  r1.publication_ids = {"P1", "P2", "P3"};
  r1.scholarships = {{ScholarshipKind::Masters, {2005, 1, 1}},
                     {ScholarshipKind::Postdoc, {2016, 2, 1}}};
  r1.area_codes = {"l3a", "l3b"};
  c.researchers.emplace("R1", r1);
  c.researchers.emplace("R2", Researcher{"R2", "IB", {}, {}, {}, {}});
  c.researchers.emplace("R3", Researcher{"R3", "IA", {}, {}, {}, {}});

  Grant g1;
  g1.id = "2009/00001-1";
  g1.pi_id = "R1";
  g1.field = ResearchField::OTHER;
  g1.start_date = {2009, 5, 1};
  g1.duration_months = 18;
  g1.keywords = {"Machine  Learning", "biology"};
  g1.publication_ids = {"P1"};
  g1.associated_researcher_ids = {"R2"};
  g1.associated_researcher_count = 1;
  g1.host_institution_id = "IA";

  Grant g2 = g1;
  g2.id = "2014/00002-2";
  g2.start_date = {2014, 3, 1};
  g2.duration_months = 24;
  g2.keywords = {"biology"};
  g2.publication_ids = {};
  g2.associated_researcher_ids = {"R3"};

  Grant g3 = g1;
  g3.id = "2015/00003-3";
  g3.field = ResearchField::MED;
  g3.start_date = {2015, 6, 1};
  g3.duration_months = 23;
  g3.keywords = {"Chemistry"};
  g3.publication_ids = {"P3"};
  g3.associated_researcher_ids = {};
  g3.associated_researcher_count = 0;

  Grant g4 = g3;  // too short to qualify
  g4.id = "2015/00004-4";
  g4.duration_months = 22;
  g4.publication_ids = {};

  Grant g5 = g3;  // starts on the window boundary
  g5.id = "2016/00005-5";
  g5.start_date = {2016, 1, 1};
  g5.duration_months = 24;
  g5.publication_ids = {};

  for (const Grant& g : {g1, g2, g3, g4, g5}) c.grants.emplace(g.id, g);
  return c;
}

}  // namespace

TEST_CASE("serialize then load round-trips and is stable") {
  TempDir dir("gp_corpus_roundtrip");
  const CorpusPaths paths = paths_in(dir.path);
  serialize_corpus(fixture_corpus(), paths);

  GrantCorpus loaded = load_corpus(paths);
  CHECK(loaded.grants.size() == 5);
  CHECK(loaded.researchers.size() == 3);
  CHECK(loaded.publications.size() == 3);
  CHECK(loaded.institutions.size() == 2);
  CHECK(loaded.taxonomy.by_level3.size() == 2);
  CHECK(loaded.institution_index == std::vector<std::string>{"IA", "IB"});
  CHECK(loaded.institution_position("IB") == 1);
  CHECK(loaded.grants.at("2009/00001-1").keywords.size() == 2);
  CHECK(loaded.researchers.at("R1").scholarships.size() == 2);

  TempDir dir2("gp_corpus_roundtrip2");
  const CorpusPaths paths2 = paths_in(dir2.path);
  serialize_corpus(loaded, paths2);
  CHECK(slurp(paths.grants) == slurp(paths2.grants));
  CHECK(slurp(paths.researchers) == slurp(paths2.researchers));
  CHECK(slurp(paths.publications) == slurp(paths2.publications));
  CHECK(slurp(paths.institutions) == slurp(paths2.institutions));
  CHECK(slurp(paths.taxonomy) == slurp(paths2.taxonomy));
}

TEST_CASE("snapshot applies the strict temporal cutoff") {
  const GrantCorpus c = fixture_corpus();
  const ResearcherSnapshot s = snapshot(c, "R1", {2015, 6, 1});

  // The grant starting exactly on the cutoff date is excluded.
  REQUIRE(s.prior_grants.size() == 2);
  CHECK(s.prior_grants[0].grant->id == "2009/00001-1");
  CHECK(s.prior_grants[1].grant->id == "2014/00002-2");
  CHECK(s.prior_grants[0].publication_count == 1);

  CHECK(s.subject_counts.at("machine learning") == 1);
  CHECK(s.subject_counts.at("biology") == 2);
  CHECK(s.subject_counts.count("chemistry") == 0);

  REQUIRE(s.prior_publications.size() == 2);
  CHECK(s.prior_publications[0].year == 2010);
  CHECK(s.prior_publications[1].year == 2014);

  CHECK(s.local_collaborators == std::set<std::string>{"R3"});
  CHECK(s.abroad_collaborators == std::set<std::string>{"R2"});
  CHECK(s.distinct_coauthors == std::set<std::string>{"R2", "R3"});

  CHECK(s.scholarship_counts[static_cast<int>(ScholarshipKind::Masters)] == 1);
  CHECK(s.scholarship_counts[static_cast<int>(ScholarshipKind::Postdoc)] == 0);
}

TEST_CASE("publications in the cutoff year are excluded") {
  const GrantCorpus c = fixture_corpus();
  const ResearcherSnapshot s = snapshot(c, "R1", {2014, 12, 31});
  REQUIRE(s.prior_publications.size() == 1);  // only the 2010 paper
  CHECK(s.prior_publications[0].year == 2010);
}

TEST_CASE("unknown researcher snapshot fails") {
  const GrantCorpus c = fixture_corpus();
  CHECK_THROWS_AS(snapshot(c, "RX", {2015, 1, 1}), Error);
}

TEST_CASE("eligibility window filters duration and start date") {
  const GrantCorpus c = fixture_corpus();
  const auto med = eligible_grants(c, ResearchField::MED);
  REQUIRE(med.size() == 1);
  CHECK(med[0]->id == "2015/00003-3");
  CHECK(eligible_grants(c, ResearchField::VET).empty());
}

TEST_CASE("grant labels respect the productivity threshold") {
  const GrantCorpus c = fixture_corpus();
  const Grant& g = c.grants.at("2009/00001-1");
  CHECK(label_grant(g) == Label::Productive);
  CHECK(label_grant(g, 2) == Label::Unproductive);
  CHECK(label_grant(c.grants.at("2014/00002-2")) == Label::Unproductive);
}

TEST_CASE("subject normalization lowercases and collapses whitespace") {
  CHECK(normalize_subject("  Machine   Learning ") == "machine learning");
  CHECK(normalize_subject("BIOLOGY") == "biology");
  CHECK(normalize_subject(" \t ") == "");
}

TEST_CASE("duplicate ids are rejected") {
  TempDir dir("gp_corpus_dup");
  const CorpusPaths paths = paths_in(dir.path);
  serialize_corpus(fixture_corpus(), paths);
  append_line(paths.institutions, R"({"id":"IA","name":"again","is_local":true})");
  try {
    load_corpus(paths);
    FAIL("expected duplicate id error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DuplicateId);
  }
}

TEST_CASE("dangling references are rejected") {
  TempDir dir("gp_corpus_dangling");
  const CorpusPaths paths = paths_in(dir.path);
  serialize_corpus(fixture_corpus(), paths);
  append_line(paths.grants,
              R"({"id":"2015/99999-9","pi_id":"NOBODY","field":"MED","start_date":"2015-01-01",)"
              R"("duration_months":23,"keywords":["x"],"host_institution_id":"IA"})");
  try {
    load_corpus(paths);
    FAIL("expected dangling reference error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DanglingReference);
  }
}

TEST_CASE("malformed grant ids are rejected") {
  TempDir dir("gp_corpus_badid");
  const CorpusPaths paths = paths_in(dir.path);
  serialize_corpus(fixture_corpus(), paths);
  append_line(paths.grants,
              R"({"id":"bad-id","pi_id":"R1","field":"MED","start_date":"2015-01-01",)"
              R"("duration_months":23,"keywords":["x"],"host_institution_id":"IA"})");
  try {
    load_corpus(paths);
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
  }
}

TEST_CASE("grants without usable keywords are flagged, not dropped") {
  TempDir dir("gp_corpus_degenerate");
  const CorpusPaths paths = paths_in(dir.path);
  GrantCorpus c = fixture_corpus();
  Grant g = c.grants.at("2015/00003-3");
  g.id = "2015/00006-6";
  g.keywords = {"   "};
  g.publication_ids.clear();
  c.grants.emplace(g.id, g);
  c.researchers.at("R1").grant_ids.push_back(g.id);
  serialize_corpus(c, paths);

  const GrantCorpus loaded = load_corpus(paths);
  CHECK(loaded.grants.at("2015/00006-6").degenerate);
  CHECK(loaded.ingestion.warnings.size() == 1);
  CHECK(loaded.ingestion.to_text().find("warnings:     1") != std::string::npos);
}

TEST_CASE("date helpers") {
  CHECK(parse_date("2015-06-01") == Date{2015, 6, 1});
  CHECK(format_date({2015, 6, 1}) == "2015-06-01");
  CHECK(add_months({2015, 11, 15}, 3) == Date{2016, 2, 15});
  CHECK(Date{2015, 6, 1} < Date{2015, 6, 2});
  CHECK_THROWS_AS(parse_date("junk"), Error);
}
