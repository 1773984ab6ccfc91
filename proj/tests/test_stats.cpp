#include "doctest.h"

#include <filesystem>
#include <string>

#include "focalmap/pipeline.hpp"
#include "focalmap/stats.hpp"
#include "support/fixtures.hpp"

namespace fs = std::filesystem;
using focalmap::CorpusStats;
using focalmap::DataError;
using testsupport::TempDir;

namespace {

struct Corpus {
    TempDir tmp;
    fs::path repos;
    fs::path data;

    Corpus() : repos(tmp.path() / "repos"), data(tmp.path() / "data") {}

    void add(const std::string& owner, const std::string& name) {
        testsupport::materialize_repo(owner, name, repos);
        focalmap::PipelineOptions opts;
        opts.repos_dir = repos;
        opts.data_dir = data;
        opts.clone = false;
        const auto result = focalmap::process_repo({owner, name}, opts);
        REQUIRE(result.ok);
    }
};

}  // namespace

TEST_CASE("per-repository counters match hand counts of the fixtures") {
    Corpus corpus;
    corpus.add("spotify", "gordon");
    corpus.add("acme", "relay");
    corpus.add("acme", "cutoff");

    const CorpusStats gordon =
        focalmap::detail::stats_of_output_dir(corpus.data / "spotify" / "gordon");
    CHECK(gordon == (CorpusStats{1, 4, 1, 1, 3, 1, 1}));

    const CorpusStats relay =
        focalmap::detail::stats_of_output_dir(corpus.data / "acme" / "relay");
    CHECK(relay == (CorpusStats{1, 3, 1, 2, 9, 3, 2}));

    const CorpusStats cutoff =
        focalmap::detail::stats_of_output_dir(corpus.data / "acme" / "cutoff");
    CHECK(cutoff == (CorpusStats{1, 3, 1, 0, 4, 2, 1}));
}

TEST_CASE("collect_stats folds every repository and obeys the merge law") {
    Corpus corpus;
    corpus.add("spotify", "gordon");
    corpus.add("acme", "relay");
    corpus.add("acme", "cutoff");

    const CorpusStats total = focalmap::collect_stats(corpus.data);
    CHECK(total == (CorpusStats{3, 10, 3, 3, 16, 6, 4}));

    const CorpusStats gordon =
        focalmap::detail::stats_of_output_dir(corpus.data / "spotify" / "gordon");
    const CorpusStats relay =
        focalmap::detail::stats_of_output_dir(corpus.data / "acme" / "relay");
    const CorpusStats cutoff =
        focalmap::detail::stats_of_output_dir(corpus.data / "acme" / "cutoff");
    CHECK(gordon + relay == (CorpusStats{2, 7, 2, 3, 12, 4, 3}));
    CHECK((gordon + relay) + cutoff == gordon + (relay + cutoff));
    CHECK(gordon + relay + cutoff == total);

    CorpusStats acc = gordon;
    acc += relay;
    acc += cutoff;
    CHECK(acc == total);
}

TEST_CASE("stats addition sums every counter componentwise") {
    const CorpusStats a{1, 2, 3, 4, 5, 6, 7};
    const CorpusStats b{10, 20, 30, 40, 50, 60, 70};
    CHECK(a + b == (CorpusStats{11, 22, 33, 44, 55, 66, 77}));
}

TEST_CASE("an index artifact without content still counts one repository") {
    TempDir tmp;
    const fs::path dir = tmp.path() / "data" / "o" / "r";
    focalmap::write_json_file(
        dir / "0123456789abcdef0123456789abcdef01234567.json",
        focalmap::json{{"schema_version", 1}, {"files", focalmap::json::object()}});
    CHECK(focalmap::detail::stats_of_output_dir(dir) == (CorpusStats{1, 0, 0, 0, 0, 0, 0}));
    CHECK(focalmap::collect_stats(tmp.path() / "data") ==
          (CorpusStats{1, 0, 0, 0, 0, 0, 0}));
}

TEST_CASE("directories without index artifacts do not count as repositories") {
    TempDir tmp;
    const fs::path data = tmp.path() / "data";
    testsupport::write_text(data / "o" / "r" / "notes.txt", "not an artifact\n");
    testsupport::write_text(
        data / "o" / "r" / "0123456789abcdef0123456789abcdef01234567.tests.json", "{}\n");
    testsupport::write_text(
        data / "o" / "r" / "0123456789ABCDEF0123456789ABCDEF01234567.json", "{}\n");
    const std::string want = "no repository outputs under " + data.generic_string();
    CHECK_THROWS_WITH_AS(focalmap::collect_stats(data), want.c_str(), DataError);
}

TEST_CASE("an empty data directory raises a data error") {
    TempDir tmp;
    const fs::path data = tmp.path() / "data";
    fs::create_directories(data);
    const std::string want = "no repository outputs under " + data.generic_string();
    CHECK_THROWS_WITH_AS(focalmap::collect_stats(data), want.c_str(), DataError);
}

TEST_CASE("index artifact names are exactly forty hex digits plus .json") {
    using focalmap::detail::is_index_artifact;
    CHECK(is_index_artifact("0123456789abcdef0123456789abcdef01234567.json"));
    CHECK_FALSE(is_index_artifact("0123456789abcdef0123456789abcdef01234567.tests.json"));
    CHECK_FALSE(is_index_artifact("0123456789abcdef0123456789abcdef01234567.focal.json"));
    CHECK_FALSE(is_index_artifact("deadbeef.json"));
    CHECK_FALSE(is_index_artifact("0123456789ABCDEF0123456789ABCDEF01234567.json"));
    CHECK_FALSE(is_index_artifact("0123456789abcdef0123456789abcdef01234567.yaml"));
}

TEST_CASE("stats serialize to json with one key per counter") {
    const CorpusStats s{3, 10, 3, 3, 16, 6, 4};
    const focalmap::json doc = s.to_json();
    CHECK(doc.size() == 7);
    CHECK(doc.at("repositories") == 3);
    CHECK(doc.at("all_files") == 10);
    CHECK(doc.at("test_files") == 3);
    CHECK(doc.at("all_classes") == 3);
    CHECK(doc.at("all_methods") == 16);
    CHECK(doc.at("test_methods") == 6);
    CHECK(doc.at("focal_methods") == 4);
}

TEST_CASE("the stats table pads labels to a fixed column") {
    const CorpusStats s{3, 10, 3, 3, 16, 6, 4};
    CHECK(s.table() ==
          "repositories    3\n"
          "all_files       10\n"
          "test_files      3\n"
          "all_classes     3\n"
          "all_methods     16\n"
          "test_methods    6\n"
          "focal_methods   4\n");
}
