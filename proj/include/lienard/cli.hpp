#pragma once

#include "lienard/catalog.hpp"
#include "lienard/quantum.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace lienard::cli {

using json = nlohmann::json;

struct Job {
    std::string id;
    std::string kind;
    json spec;
    long line = -1;
};

struct Scenario {
    std::string id;
    std::vector<Job> jobs;
    std::string output_dir;
};

struct RunOptions {
    int jobs = 1;
    std::string out;
    double tol_scale = 1;
};

struct FileRecord {
    std::string path;
    std::string sha256;
    std::size_t bytes = 0;
};

struct Check {
    std::string metric;
    double value = 0;
    double bound = 0;
    bool pass = false;
    bool equality = false;
};

struct JobResult {
    std::string id;
    std::string kind;
    std::string status = "ok";
    std::string error;
    double wall_time = 0;
    json metrics = json::object();
    std::vector<Check> checks;
    std::vector<FileRecord> files;
};

/// Per-job output sink; every artifact goes through here so the manifest sees it.
struct Sink {
    std::filesystem::path dir;
    std::string job;
    std::vector<FileRecord>* files;

    void write(const std::string& suffix, const std::string& content);
};

struct RunSummary {
    std::filesystem::path output_dir;
    std::filesystem::path manifest;
    std::vector<JobResult> results;
    bool ok = true;
};

struct ModelInfo {
    std::string name;
    int dimension;
    int lienard_type;
    std::vector<std::string> params;
    bool closed_form, frequency_law, spectrum_formula, qes;
};

struct Report {
    std::string text;
    json summary;
    bool ok = true;
};

const std::set<std::string>& job_kinds();
std::string sha256_hex(const std::string& data);
std::string read_file(const std::filesystem::path& p);
Params read_params(const json& j);
quantum::Ordering read_ordering(const json& j);

/// Parses and validates a scenario; failures are ConfigError carrying the offending line.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& p);

/// --out, then the config's output_dir, then LIENARD_OUT, then ./lienard_out.
std::filesystem::path resolve_output_dir(const RunOptions& opt, const Scenario& s);

/// Runs one job; exceptions become a "failed" status, unmet checks "tolerance_failed".
JobResult run_job(const Job& job, const std::filesystem::path& dir, double tol_scale);
json to_json(const JobResult& r);

/// Runs every job (on `opt.jobs` threads), then writes manifest.json once.
RunSummary run_scenario(const Scenario& s, const RunOptions& opt = {});

std::vector<ModelInfo> list_models(std::optional<int> lienard_type = {}, std::optional<int> dimension = {});
std::string format_models(const std::vector<ModelInfo>& ms);

/// Text table and JSON summary, rows sorted by job id then metric.
Report emit_report(const json& manifest);

}
