#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "focalmap/context.hpp"
#include "focalmap/parallel.hpp"
#include "focalmap/pipeline.hpp"
#include "focalmap/stats.hpp"

namespace {

struct CommonArgs {
    std::string repo_list;
    std::string repos_dir = "repos";
    std::string data_dir = "data";
    unsigned jobs = 0;
    std::string remote_base = "https://github.com/";
};

void add_pipeline_options(CLI::App* cmd, CommonArgs& args, bool with_remote) {
    cmd->add_option("--repo-list", args.repo_list,
                    "file with one owner/name per line, # comments allowed")
        ->required();
    cmd->add_option("--repos-dir", args.repos_dir, "checkout cache directory")
        ->capture_default_str();
    cmd->add_option("--data-dir", args.data_dir, "output directory")
        ->envname("FOCALMAP_DATA_DIR")
        ->capture_default_str();
    cmd->add_option("--jobs", args.jobs,
                    "parallel repositories (default: available cores)")
        ->check(CLI::PositiveNumber);
    if (with_remote)
        cmd->add_option("--remote-base", args.remote_base, "clone URL prefix")
            ->capture_default_str();
}

int exec_pipeline(const CommonArgs& args, bool clone, bool index_only) {
    auto log = [](const std::string& line) { std::cerr << line << "\n"; };
    std::vector<focalmap::RepoTask> tasks;
    try {
        tasks = focalmap::parse_repo_list_file(args.repo_list, log);
    } catch (const focalmap::DataError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    if (tasks.empty()) {
        std::cerr << "repo list has no valid entries: " << args.repo_list << "\n";
        return 2;
    }
    focalmap::PipelineOptions opts;
    opts.repos_dir = args.repos_dir;
    opts.data_dir = args.data_dir;
    opts.jobs = args.jobs;
    opts.remote_base = args.remote_base;
    opts.clone = clone;
    opts.index_only = index_only;
    return focalmap::run_pipeline(tasks, opts, log);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"map Python unit tests to the focal methods they exercise"};
    app.require_subcommand(1);

    CommonArgs run_args;
    CLI::App* cmd_run = app.add_subcommand(
        "run", "clone, index, discover tests, and resolve focal methods");
    add_pipeline_options(cmd_run, run_args, true);

    CommonArgs index_args;
    CLI::App* cmd_index = app.add_subcommand(
        "index", "index existing checkouts, writing only <hash>.json");
    add_pipeline_options(cmd_index, index_args, false);

    CommonArgs map_args;
    CLI::App* cmd_map = app.add_subcommand(
        "map", "index existing checkouts and write all three artifacts");
    add_pipeline_options(cmd_map, map_args, false);

    std::string focal_json;
    std::string ctx_repos_dir = "repos";
    std::string ctx_remote_base = "https://github.com/";
    CLI::App* cmd_context = app.add_subcommand(
        "context", "render focal contexts for one <hash>.focal.json");
    cmd_context->add_option("focal_json", focal_json, "path to <hash>.focal.json")
        ->required();
    cmd_context->add_option("--repos-dir", ctx_repos_dir, "checkout cache directory")
        ->capture_default_str();
    cmd_context->add_option("--remote-base", ctx_remote_base, "clone URL prefix")
        ->capture_default_str();

    std::string stats_data_dir = "data";
    CLI::App* cmd_stats =
        app.add_subcommand("stats", "aggregate corpus counters over a data directory");
    cmd_stats->add_option("--data-dir", stats_data_dir, "output directory to scan")
        ->envname("FOCALMAP_DATA_DIR")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (cmd_run->parsed()) return exec_pipeline(run_args, true, false);
        if (cmd_index->parsed()) return exec_pipeline(index_args, false, true);
        if (cmd_map->parsed()) return exec_pipeline(map_args, false, false);

        if (cmd_context->parsed()) {
            try {
                focalmap::parse_focal_path(focal_json);
            } catch (const focalmap::DataError& e) {
                std::cerr << e.what() << "\n";
                return 2;
            }
            const focalmap::ContextGenResult result =
                focalmap::generate_for_repo(focal_json, ctx_repos_dir, ctx_remote_base);
            for (const auto& note : result.notes)
                std::cerr << "skipped " << note << "\n";
            std::cerr << "wrote " << result.written << " contexts to "
                      << result.out_path.generic_string() << "\n";
            return 0;
        }

        if (cmd_stats->parsed()) {
            focalmap::CorpusStats stats;
            try {
                stats = focalmap::collect_stats(stats_data_dir);
            } catch (const focalmap::DataError& e) {
                std::cerr << e.what() << "\n";
                return 2;
            }
            std::cerr << stats.table();
            std::cout << stats.to_json().dump(2) << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
