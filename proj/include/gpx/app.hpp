#pragma once

// Run configuration, artifact persistence and the subcommand driver behind
// the gpx executable.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gpx/asymptotics.hpp"

namespace gpx {

/// Flat key=value configuration. Absent a means a = a*/2, resolved once the
/// q = 2 constants are known.
struct RunConfig {
    std::optional<double> a;
    double q = 2.2;
    double b1 = 1.2;
    double b2 = 1.0;
    double A = 1.0;
    PotentialKind potential = PotentialKind::ellipse;
    int nx = 257;
    double L = 12.0;
    double tol_residual = 1e-8;
    double tol_pohozaev = 1e-4;
    int max_newton_iters = 40;
    std::optional<Point> seed_x0;
    std::vector<double> q_schedule;
    std::vector<double> q_list{2.2, 2.1, 2.05};
    std::uint64_t seed = 1;
    int threads = 1;
    std::string out = ".";

    bool operator==(const RunConfig&) const = default;

    void validate() const;
    ProblemParams params(double a_star) const;
    SolveConfig solve_config() const;
};

/// ParseError carries the line number; RangeError names the key.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
/// Every key, 17 significant digits; parse_config reads it back exactly.
std::string serialize_config(const RunConfig& cfg);

/// Applies one "key=value" assignment on top of an existing config.
void set_key(RunConfig& cfg, const std::string& key, const std::string& value);

std::string fmt17(double x);
std::uint64_t fnv1a64(const std::string& bytes);

// ---- SolveReport as a key=value block ----

struct StoredReport {
    SolveReport report;  // scalars and u_q; the blow-up frame field v is not stored
    ProblemParams params;
};

std::string report_text(const SolveReport& r, const ProblemParams& p, const std::string& field_file);
/// Reads back the scalar entries; the field is loaded from the dump named by
/// the field key, relative to the report.
StoredReport read_report(const std::filesystem::path& path);

std::string report_name(double q);  // report_q<q>.txt
std::string field_name(double q);   // field_q<q>.f2d

/// Collects the outputs of one run and writes manifest_<subcommand>.json.
class Manifest {
public:
    Manifest(std::filesystem::path dir, std::string subcommand, const RunConfig& cfg);
    /// Writes bytes to dir/name and records the entry.
    void write(const std::string& name, const std::string& bytes);
    void finish(double wall_seconds, int exit_code) const;

private:
    std::filesystem::path dir_;
    std::string sub_;
    std::string cfg_text_;
    int threads_;
    std::vector<std::pair<std::string, std::string>> entries_;  // name, hash
    std::vector<std::uintmax_t> sizes_;
};

struct ManifestCheck {
    std::string manifest;
    std::string file;
    bool ok = false;
    std::string detail;
};

/// Re-hashes every artifact listed by the manifests in dir.
std::vector<ManifestCheck> check_manifests(const std::filesystem::path& dir);

/// Whole command line; returns the process exit code (0 ok, 1 numerical
/// failure, 2 usage or configuration error).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gpx
