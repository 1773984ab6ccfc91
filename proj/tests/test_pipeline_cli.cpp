#include "doctest.h"

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "focalmap/pipeline.hpp"
#include "focalmap/store.hpp"
#include "support/fixtures.hpp"

namespace fs = std::filesystem;
using focalmap::RepoTask;
using testsupport::TempDir;

namespace {

struct WarnLog {
    std::vector<std::string> lines;
    std::function<void(const std::string&)> fn() {
        return [this](const std::string& line) { lines.push_back(line); };
    }
};

std::vector<RepoTask> parse_list(const std::string& text, WarnLog& warnings) {
    std::istringstream in(text);
    return focalmap::parse_repo_list(in, warnings.fn());
}

}  // namespace

TEST_CASE("repo lists accept owner/name entries with comments and whitespace") {
    WarnLog warnings;
    const auto tasks = parse_list(
        "spotify/gordon\n"
        "  acme/relay  # trailing comment\n"
        "\n"
        "# a full comment line\n",
        warnings);
    REQUIRE(tasks.size() == 2);
    CHECK(tasks[0].owner == "spotify");
    CHECK(tasks[0].name == "gordon");
    CHECK(tasks[1].owner == "acme");
    CHECK(tasks[1].name == "relay");
    CHECK(warnings.lines.empty());
}

TEST_CASE("malformed repo list lines are warned about and skipped") {
    WarnLog warnings;
    const auto tasks = parse_list(
        "acme/relay\n"
        "no-slash\n"
        "two/slashes/deep\n"
        "ow ner/x\n"
        "/lead\n"
        "trail/\n",
        warnings);
    REQUIRE(tasks.size() == 1);
    REQUIRE(warnings.lines.size() == 5);
    CHECK(warnings.lines[0] == "skipping malformed repo list line 2: no-slash");
    CHECK(warnings.lines[1] == "skipping malformed repo list line 3: two/slashes/deep");
    CHECK(warnings.lines[2] == "skipping malformed repo list line 4: ow ner/x");
    CHECK(warnings.lines[3] == "skipping malformed repo list line 5: /lead");
    CHECK(warnings.lines[4] == "skipping malformed repo list line 6: trail/");
}

TEST_CASE("a missing repo list file raises a data error") {
    WarnLog warnings;
    CHECK_THROWS_AS(focalmap::parse_repo_list_file("/nonexistent/list.txt", warnings.fn()),
                    focalmap::DataError);
}

TEST_CASE("the run subcommand clones, indexes, and writes all artifacts") {
    TempDir tmp;
    const fs::path remotes = tmp.path() / "remotes";
    const fs::path repos = tmp.path() / "repos";
    const fs::path data = tmp.path() / "data";
    const std::string hash = testsupport::materialize_repo("acme", "relay", remotes);
    const fs::path list = tmp.path() / "list.txt";
    testsupport::write_text(list, "acme/relay\n");

    const auto r = testsupport::run_cli({"run", "--repo-list", list.string(),
                                         "--repos-dir", repos.string(), "--data-dir",
                                         data.string(), "--remote-base",
                                         remotes.string() + "/"});
    CAPTURE(r.err);
    CHECK(r.exit_code == 0);
    CHECK(r.err.find("acme/relay: 3 files, 1 test files, 1 mapped test files") !=
          std::string::npos);

    const fs::path out = data / "acme" / "relay";
    CHECK(fs::exists(out / (hash + ".json")));
    CHECK(fs::exists(out / (hash + ".tests.json")));
    CHECK(fs::exists(out / (hash + ".focal.json")));
    CHECK(fs::exists(repos / "acme" / "relay" / "relay" / "log_relay.py"));

    const auto mappings = focalmap::read_focal(out / (hash + ".focal.json"));
    REQUIRE(mappings.size() == 1);
    CHECK(mappings[0].test_file == "tests/test_log_relay.py");
    CHECK(mappings[0].focal_file == "relay/log_relay.py");
    CHECK(mappings[0].entries.count("test_create_metric") == 1);
    CHECK(mappings[0].entries.count("test_incr") == 1);
}

TEST_CASE("per-repository failures do not sink the whole run") {
    TempDir tmp;
    const fs::path remotes = tmp.path() / "remotes";
    const fs::path list = tmp.path() / "list.txt";
    testsupport::materialize_repo("acme", "relay", remotes);
    testsupport::write_text(list, "acme/relay\nghost/nothing\n");

    const auto r = testsupport::run_cli(
        {"run", "--repo-list", list.string(), "--repos-dir",
         (tmp.path() / "repos").string(), "--data-dir", (tmp.path() / "data").string(),
         "--remote-base", remotes.string() + "/", "--jobs", "1"});
    CAPTURE(r.err);
    CHECK(r.exit_code == 0);
    CHECK(r.err.find("ghost/nothing: failed:") != std::string::npos);
    CHECK(fs::exists(tmp.path() / "data" / "acme" / "relay"));
}

TEST_CASE("the run exits nonzero when every repository fails") {
    TempDir tmp;
    const fs::path list = tmp.path() / "list.txt";
    testsupport::write_text(list, "ghost/nothing\n");
    fs::create_directories(tmp.path() / "remotes");

    const auto r = testsupport::run_cli(
        {"run", "--repo-list", list.string(), "--repos-dir",
         (tmp.path() / "repos").string(), "--data-dir", (tmp.path() / "data").string(),
         "--remote-base", (tmp.path() / "remotes").string() + "/"});
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("ghost/nothing: failed:") != std::string::npos);
}

TEST_CASE("the index subcommand writes only the index artifact") {
    TempDir tmp;
    const fs::path repos = tmp.path() / "repos";
    const fs::path data = tmp.path() / "data";
    const std::string hash = testsupport::materialize_repo("acme", "cutoff", repos);
    const fs::path list = tmp.path() / "list.txt";
    testsupport::write_text(list, "acme/cutoff\n");

    const auto r = testsupport::run_cli({"index", "--repo-list", list.string(),
                                         "--repos-dir", repos.string(), "--data-dir",
                                         data.string()});
    CAPTURE(r.err);
    CHECK(r.exit_code == 0);
    const fs::path out = data / "acme" / "cutoff";
    CHECK(fs::exists(out / (hash + ".json")));
    CHECK_FALSE(fs::exists(out / (hash + ".tests.json")));
    CHECK_FALSE(fs::exists(out / (hash + ".focal.json")));
}

TEST_CASE("the index subcommand fails without a checkout to read") {
    TempDir tmp;
    const fs::path list = tmp.path() / "list.txt";
    testsupport::write_text(list, "acme/absent\n");
    const auto r = testsupport::run_cli({"index", "--repo-list", list.string(),
                                         "--repos-dir", (tmp.path() / "repos").string(),
                                         "--data-dir", (tmp.path() / "data").string()});
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("acme/absent: failed: no checkout at ") != std::string::npos);
}

TEST_CASE("the map subcommand uses cwd-relative default directories") {
    TempDir tmp;
    const std::string hash =
        testsupport::materialize_repo("acme", "relay", tmp.path() / "repos");
    testsupport::write_text(tmp.path() / "list.txt", "acme/relay\n");

    const auto r =
        testsupport::run_cli({"map", "--repo-list", "list.txt"}, tmp.path().string());
    CAPTURE(r.err);
    CHECK(r.exit_code == 0);
    const fs::path out = tmp.path() / "data" / "acme" / "relay";
    CHECK(fs::exists(out / (hash + ".json")));
    CHECK(fs::exists(out / (hash + ".tests.json")));
    CHECK(fs::exists(out / (hash + ".focal.json")));
}

TEST_CASE("the data directory can come from the environment") {
    TempDir tmp;
    testsupport::materialize_repo("acme", "cutoff", tmp.path() / "repos");
    testsupport::write_text(tmp.path() / "list.txt", "acme/cutoff\n");
    const fs::path env_data = tmp.path() / "env-data";

    const auto r = testsupport::run_cli(
        {"map", "--repo-list", "list.txt"}, tmp.path().string(),
        {{"FOCALMAP_DATA_DIR", env_data.string()}});
    CAPTURE(r.err);
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(env_data / "acme" / "cutoff"));
    CHECK_FALSE(fs::exists(tmp.path() / "data"));
}

TEST_CASE("mapping the same checkout twice produces identical bytes") {
    TempDir tmp;
    const std::string hash =
        testsupport::materialize_repo("spotify", "gordon", tmp.path() / "repos");
    testsupport::write_text(tmp.path() / "list.txt", "spotify/gordon\n");

    const auto first = testsupport::run_cli(
        {"map", "--repo-list", "list.txt", "--data-dir", "data-a"}, tmp.path().string());
    const auto second = testsupport::run_cli(
        {"map", "--repo-list", "list.txt", "--data-dir", "data-b"}, tmp.path().string());
    REQUIRE(first.exit_code == 0);
    REQUIRE(second.exit_code == 0);

    for (const std::string suffix : {".json", ".tests.json", ".focal.json"}) {
        const fs::path a =
            tmp.path() / "data-a" / "spotify" / "gordon" / (hash + suffix);
        const fs::path b =
            tmp.path() / "data-b" / "spotify" / "gordon" / (hash + suffix);
        CHECK(testsupport::read_text(a) == testsupport::read_text(b));
    }
}

TEST_CASE("usage errors exit with status two") {
    TempDir tmp;
    SUBCASE("unknown subcommand") {
        const auto r = testsupport::run_cli({"bogus"});
        CHECK(r.exit_code == 2);
    }
    SUBCASE("no subcommand") {
        const auto r = testsupport::run_cli({});
        CHECK(r.exit_code == 2);
    }
    SUBCASE("run without --repo-list") {
        const auto r = testsupport::run_cli({"run"});
        CHECK(r.exit_code == 2);
    }
    SUBCASE("missing repo list file") {
        const auto r = testsupport::run_cli(
            {"run", "--repo-list", (tmp.path() / "absent.txt").string()});
        CHECK(r.exit_code == 2);
        CHECK(r.err.find("cannot read repo list: ") != std::string::npos);
    }
    SUBCASE("repo list without valid entries") {
        const fs::path list = tmp.path() / "list.txt";
        testsupport::write_text(list, "# nothing\nbogus_line\n");
        const auto r = testsupport::run_cli({"run", "--repo-list", list.string()});
        CHECK(r.exit_code == 2);
        CHECK(r.err.find("skipping malformed repo list line 2: bogus_line") !=
              std::string::npos);
        CHECK(r.err.find("repo list has no valid entries: ") != std::string::npos);
    }
    SUBCASE("zero jobs") {
        const fs::path list = tmp.path() / "list.txt";
        testsupport::write_text(list, "acme/relay\n");
        const auto r = testsupport::run_cli(
            {"run", "--repo-list", list.string(), "--jobs", "0"});
        CHECK(r.exit_code == 2);
    }
}

TEST_CASE("the stats subcommand prints a table on stderr and json on stdout") {
    TempDir tmp;
    testsupport::materialize_repo("acme", "relay", tmp.path() / "repos");
    testsupport::write_text(tmp.path() / "list.txt", "acme/relay\n");
    const auto mapped = testsupport::run_cli(
        {"map", "--repo-list", "list.txt"}, tmp.path().string());
    REQUIRE(mapped.exit_code == 0);

    const auto r = testsupport::run_cli({"stats", "--data-dir", "data"},
                                        tmp.path().string());
    CAPTURE(r.err);
    REQUIRE(r.exit_code == 0);
    const auto doc = focalmap::json::parse(r.out);
    CHECK(doc.at("repositories") == 1);
    CHECK(doc.at("all_files") == 3);
    CHECK(doc.at("test_files") == 1);
    CHECK(doc.at("all_classes") == 2);
    CHECK(doc.at("all_methods") == 9);
    CHECK(doc.at("test_methods") == 3);
    CHECK(doc.at("focal_methods") == 2);
    CHECK(r.err.find("repositories    1\n") != std::string::npos);
    CHECK(r.err.find("focal_methods   2\n") != std::string::npos);
}

TEST_CASE("the stats subcommand exits with status two on an empty data dir") {
    TempDir tmp;
    fs::create_directories(tmp.path() / "data");
    const auto r =
        testsupport::run_cli({"stats", "--data-dir", "data"}, tmp.path().string());
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("no repository outputs under ") != std::string::npos);
}

TEST_CASE("the context subcommand renders contexts for a focal artifact") {
    TempDir tmp;
    testsupport::materialize_repo("acme", "relay", tmp.path() / "remotes");
    testsupport::write_text(tmp.path() / "list.txt", "acme/relay\n");
    const auto ran = testsupport::run_cli(
        {"run", "--repo-list", "list.txt", "--remote-base",
         (tmp.path() / "remotes").string() + "/"},
        tmp.path().string());
    REQUIRE(ran.exit_code == 0);

    std::string hash;
    for (const auto& entry :
         fs::directory_iterator(tmp.path() / "data" / "acme" / "relay")) {
        const std::string name = entry.path().filename().string();
        if (name.ends_with(".focal.json"))
            hash = name.substr(0, name.size() - std::string(".focal.json").size());
    }
    REQUIRE(hash.size() == 40);

    const auto r = testsupport::run_cli(
        {"context", "data/acme/relay/" + hash + ".focal.json"}, tmp.path().string());
    CAPTURE(r.err);
    CHECK(r.exit_code == 0);
    const fs::path out =
        tmp.path() / "data" / "acme" / "relay" / (hash + ".contexts.json");
    CHECK(r.err.find("wrote 2 contexts to " +
                     fs::path("data/acme/relay/" + hash + ".contexts.json")
                         .generic_string()) != std::string::npos);
    REQUIRE(fs::exists(out));

    const auto doc = focalmap::read_json_file(out);
    const std::string golden =
        testsupport::read_text(testsupport::golden_dir() / "log_relay_context.txt");
    CHECK(doc.at("tests/test_log_relay.py").at("test_create_metric") == golden);
}

TEST_CASE("the context subcommand rejects paths that are not focal artifacts") {
    const auto r = testsupport::run_cli({"context", "data/acme/relay/whatever.json"});
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("focal path must end in <40-hex-hash>.focal.json") !=
          std::string::npos);
}
