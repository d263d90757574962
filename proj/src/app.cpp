#include "gpx/app.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cstring>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace gpx {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

/// Shortest representation that reads back to the same double.
std::string exact(double x) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

std::string exact_list(const std::vector<double>& v) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + exact(v[k]);
    return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    return out;
}

struct BadValue {
    std::string why;
};

double to_double(const std::string& s) {
    double x = 0.0;
    const char* end = s.data() + s.size();
    const auto r = std::from_chars(s.data(), end, x);
    if (s.empty() || r.ec != std::errc() || r.ptr != end) throw BadValue{"not a number: '" + s + "'"};
    return x;
}

template <typename I>
I to_int(const std::string& s) {
    I x = 0;
    const char* end = s.data() + s.size();
    const auto r = std::from_chars(s.data(), end, x);
    if (s.empty() || r.ec != std::errc() || r.ptr != end) throw BadValue{"not an integer: '" + s + "'"};
    return x;
}

std::vector<double> to_list(const std::string& s) {
    std::vector<double> v;
    if (trim(s).empty()) return v;
    for (const auto& t : split(s, ',')) v.push_back(to_double(t));
    return v;
}

Point to_point(const std::string& s) {
    const auto v = to_list(s);
    if (v.size() != 2) throw BadValue{"expected x,y: '" + s + "'"};
    return {v[0], v[1]};
}

void range(const char* key, bool ok, const std::string& value, const std::string& why) {
    if (!ok) throw Error(ErrorKind::RangeError, std::string(key) + " = " + value + ": " + why);
}

std::string hex64(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string read_file(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    if (!is) throw Error(ErrorKind::IoError, "cannot open " + p.string());
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

/// Static partition of [0, n) over the worker threads; each index owns its slot.
template <typename F>
void parallel_for(int n, int threads, F&& f) {
    const int w = std::max(1, std::min(threads, n));
    if (w == 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(static_cast<std::size_t>(w));
    for (int t = 0; t < w; ++t)
        pool.emplace_back([&, t] {
            try {
                for (int i = t; i < n; i += w) f(i);
            } catch (...) {
                errs[std::size_t(t)] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

}  // namespace

std::string fmt17(double x) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// ---- config ----

void RunConfig::validate() const {
    range("q", q > 2.0 && q <= 4.0, exact(q), "must lie in (2, 4]");
    if (a) range("a", *a > 0.0, exact(*a), "must be positive");
    range("b2", b2 > 0.0, exact(b2), "must be positive");
    range("b1", b1 > b2, exact(b1), "must exceed b2");
    range("A", A > 0.0, exact(A), "must be positive");
    range("nx", nx >= 33 && nx % 2 == 1, std::to_string(nx), "must be odd and at least 33");
    range("L", L > 0.0, exact(L), "must be positive");
    range("tol_residual", tol_residual > 0.0, exact(tol_residual), "must be positive");
    range("tol_pohozaev", tol_pohozaev > 0.0, exact(tol_pohozaev), "must be positive");
    range("max_newton_iters", max_newton_iters >= 1, std::to_string(max_newton_iters), "must be at least 1");
    range("threads", threads >= 1 && threads <= 1024, std::to_string(threads), "must lie in [1, 1024]");
    for (std::size_t k = 0; k < q_schedule.size(); ++k) {
        range("q_schedule", q_schedule[k] > q && q_schedule[k] <= 4.0, exact_list(q_schedule),
              "entries must lie in (q, 4]");
        if (k) range("q_schedule", q_schedule[k] < q_schedule[k - 1], exact_list(q_schedule), "must decrease strictly");
    }
    range("q_list", !q_list.empty(), "", "must not be empty");
    for (std::size_t k = 0; k < q_list.size(); ++k) {
        range("q_list", q_list[k] > 2.0 && q_list[k] <= 4.0, exact_list(q_list), "entries must lie in (2, 4]");
        if (k) range("q_list", q_list[k] < q_list[k - 1], exact_list(q_list), "must decrease strictly");
    }
    range("out", !out.empty(), out, "must not be empty");
}

ProblemParams RunConfig::params(double a_star) const {
    ProblemParams p;
    p.a = a.value_or(0.5 * a_star);
    p.q = q;
    p.b1 = b1;
    p.b2 = b2;
    p.A = A;
    p.potential = potential;
    check_params(p, a_star);
    return p;
}

SolveConfig RunConfig::solve_config() const {
    SolveConfig c;
    c.n = nx;
    c.L = L;
    c.tol_residual = tol_residual;
    c.tol_pohozaev = tol_pohozaev;
    c.max_newton_iters = max_newton_iters;
    c.q_schedule = q_schedule;
    c.seed_x0 = seed_x0;
    c.threads = threads;
    c.validate();
    return c;
}

void set_key(RunConfig& c, const std::string& key, const std::string& v) {
    if (key == "a") c.a = v == "auto" ? std::nullopt : std::optional<double>(to_double(v));
    else if (key == "q") c.q = to_double(v);
    else if (key == "b1") c.b1 = to_double(v);
    else if (key == "b2") c.b2 = to_double(v);
    else if (key == "A") c.A = to_double(v);
    else if (key == "potential") {
        if (v == "ellipse") c.potential = PotentialKind::ellipse;
        else if (v == "zero") c.potential = PotentialKind::zero;
        else throw BadValue{"potential must be ellipse or zero: '" + v + "'"};
    } else if (key == "nx") c.nx = to_int<int>(v);
    else if (key == "L") c.L = to_double(v);
    else if (key == "tol_residual") c.tol_residual = to_double(v);
    else if (key == "tol_pohozaev") c.tol_pohozaev = to_double(v);
    else if (key == "max_newton_iters") c.max_newton_iters = to_int<int>(v);
    else if (key == "seed_x0") c.seed_x0 = v == "auto" ? std::nullopt : std::optional<Point>(to_point(v));
    else if (key == "q_schedule") c.q_schedule = to_list(v);
    else if (key == "q_list") c.q_list = to_list(v);
    else if (key == "seed") c.seed = to_int<std::uint64_t>(v);
    else if (key == "threads") c.threads = to_int<int>(v);
    else if (key == "out") c.out = v;
    else throw BadValue{"unknown key '" + key + "'"};
}

RunConfig parse_config(const std::string& text) {
    RunConfig c;
    std::istringstream is(text);
    std::string line;
    std::set<std::string> seen;
    for (int no = 1; std::getline(is, line); ++no) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        auto fail = [&](const std::string& why) {
            throw Error(ErrorKind::ParseError, "line " + std::to_string(no) + ": " + why);
        };
        if (eq == std::string::npos) fail("expected key = value, got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) fail("missing key");
        if (!seen.insert(key).second) fail("duplicate key '" + key + "'");
        try {
            set_key(c, key, trim(line.substr(eq + 1)));
        } catch (const BadValue& b) {
            fail(b.why);
        }
    }
    c.validate();
    return c;
}

RunConfig load_config(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(ErrorKind::IoError, "cannot open config file " + path.string());
    std::ostringstream os;
    os << is.rdbuf();
    return parse_config(os.str());
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream os;
    os << "a = " << (c.a ? exact(*c.a) : "auto") << '\n';
    os << "q = " << exact(c.q) << '\n';
    os << "b1 = " << exact(c.b1) << '\n';
    os << "b2 = " << exact(c.b2) << '\n';
    os << "A = " << exact(c.A) << '\n';
    os << "potential = " << (c.potential == PotentialKind::ellipse ? "ellipse" : "zero") << '\n';
    os << "nx = " << c.nx << '\n';
    os << "L = " << exact(c.L) << '\n';
    os << "tol_residual = " << exact(c.tol_residual) << '\n';
    os << "tol_pohozaev = " << exact(c.tol_pohozaev) << '\n';
    os << "max_newton_iters = " << c.max_newton_iters << '\n';
    os << "seed_x0 = " << (c.seed_x0 ? exact(c.seed_x0->x()) + "," + exact(c.seed_x0->y()) : "auto") << '\n';
    os << "q_schedule = " << exact_list(c.q_schedule) << '\n';
    os << "q_list = " << exact_list(c.q_list) << '\n';
    os << "seed = " << c.seed << '\n';
    os << "threads = " << c.threads << '\n';
    os << "out = " << c.out << '\n';
    return os.str();
}

// ---- reports ----

std::string report_name(double q) { return "report_q" + exact(q) + ".txt"; }
std::string field_name(double q) { return "field_q" + exact(q) + ".f2d"; }

namespace {

const char* stencil_name(Stencil s) { return s == Stencil::fourth_order ? "fourth_order" : "five_point"; }

Bracket bracket_from(const std::string& s) {
    if (s == "below") return Bracket::below;
    if (s == "above") return Bracket::above;
    if (s == "inside") return Bracket::inside;
    throw Error(ErrorKind::ParseError, "bad bracket value '" + s + "'");
}

}  // namespace

std::string report_text(const SolveReport& r, const ProblemParams& p, const std::string& field_file) {
    std::ostringstream os;
    auto kv = [&](const char* k, const std::string& v) { os << k << '=' << v << '\n'; };
    auto pt = [](const Point& x) { return exact(x.x()) + "," + exact(x.y()); };
    kv("q", exact(r.q));
    kv("a", exact(p.a));
    kv("b1", exact(p.b1));
    kv("b2", exact(p.b2));
    kv("A", exact(p.A));
    kv("potential", p.trapped() ? "ellipse" : "zero");
    kv("tau", exact(r.tau));
    kv("kappa", exact(r.kappa));
    kv("mu_q", exact(r.mu_q));
    kv("nu", exact(r.nu));
    kv("energy", exact(r.energy.total));
    kv("kinetic", exact(r.energy.kinetic));
    kv("potential_energy", exact(r.energy.potential));
    kv("interaction", exact(r.energy.interaction));
    kv("residual_inf", exact(r.residual_inf));
    kv("pin_residual", exact(r.pin_residual));
    kv("pohozaev_res", exact(r.pohozaev_res));
    kv("eps_q", exact(r.eps_q));
    kv("grad_sq", exact(r.grad_sq));
    kv("mass", exact(r.mass));
    kv("min_value", exact(r.min_value));
    kv("iterations", std::to_string(r.iterations));
    kv("psi_iterations", std::to_string(r.psi_iterations));
    kv("clip_resolves", std::to_string(r.clip_resolves));
    kv("c_h", exact(r.c_h));
    kv("c_tilde_scaled", exact(r.c_tilde_scaled));
    kv("excess_scaled", exact(r.excess_scaled));
    kv("K_stmt", exact(r.K_stmt));
    kv("K_proof", exact(r.K_proof));
    kv("bracket_stmt", to_string(r.bracket_stmt));
    kv("bracket_proof", to_string(r.bracket_proof));
    kv("x0", pt(r.x0));
    kv("x_c", pt(r.x_c));
    kv("D", pt(r.D));
    kv("sigma", exact(r.sigma[0]) + "," + exact(r.sigma[1]));
    kv("lambda1", exact(r.lambda1));
    kv("t_q", exact(r.t_q));
    kv("threads", std::to_string(r.threads));
    kv("converged", r.converged ? "1" : "0");
    kv("stencil", stencil_name(r.u_q.grid().stencil));
    kv("field", field_file);
    return os.str();
}

StoredReport read_report(const fs::path& path) {
    std::istringstream is(read_file(path));
    std::map<std::string, std::string> m;
    std::string line;
    for (int no = 1; std::getline(is, line); ++no) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorKind::ParseError, path.string() + " line " + std::to_string(no) + ": expected key=value");
        m[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    auto get = [&](const char* k) -> const std::string& {
        auto it = m.find(k);
        if (it == m.end()) throw Error(ErrorKind::ParseError, path.string() + ": missing key " + k);
        return it->second;
    };
    StoredReport s;
    SolveReport& r = s.report;
    try {
        auto d = [&](const char* k) { return to_double(get(k)); };
        auto i = [&](const char* k) { return to_int<int>(get(k)); };
        r.q = d("q");
        s.params.q = r.q;
        s.params.a = d("a");
        s.params.b1 = d("b1");
        s.params.b2 = d("b2");
        s.params.A = d("A");
        s.params.potential = get("potential") == "zero" ? PotentialKind::zero : PotentialKind::ellipse;
        r.tau = d("tau");
        r.kappa = d("kappa");
        r.mu_q = d("mu_q");
        r.nu = d("nu");
        r.energy.total = d("energy");
        r.energy.kinetic = d("kinetic");
        r.energy.potential = d("potential_energy");
        r.energy.interaction = d("interaction");
        r.residual_inf = d("residual_inf");
        r.pin_residual = d("pin_residual");
        r.pohozaev_res = d("pohozaev_res");
        r.eps_q = d("eps_q");
        r.grad_sq = d("grad_sq");
        r.mass = d("mass");
        r.min_value = d("min_value");
        r.iterations = i("iterations");
        r.psi_iterations = i("psi_iterations");
        r.clip_resolves = i("clip_resolves");
        r.c_h = d("c_h");
        r.c_tilde_scaled = d("c_tilde_scaled");
        r.excess_scaled = d("excess_scaled");
        r.K_stmt = d("K_stmt");
        r.K_proof = d("K_proof");
        r.bracket_stmt = bracket_from(get("bracket_stmt"));
        r.bracket_proof = bracket_from(get("bracket_proof"));
        r.x0 = to_point(get("x0"));
        r.x_c = to_point(get("x_c"));
        r.D = to_point(get("D"));
        const Point sg = to_point(get("sigma"));
        r.sigma = {sg.x(), sg.y()};
        r.lambda1 = d("lambda1");
        r.t_q = d("t_q");
        r.threads = i("threads");
        r.converged = get("converged") == "1";
    } catch (const BadValue& b) {
        throw Error(ErrorKind::ParseError, path.string() + ": " + b.why);
    }
    const Stencil st = get("stencil") == "fourth_order" ? Stencil::fourth_order : Stencil::five_point;
    const fs::path fp = path.parent_path() / get("field");
    std::ifstream fs_(fp, std::ios::binary);
    if (!fs_) throw Error(ErrorKind::IoError, "cannot open field dump " + fp.string());
    r.u_q = read_field(fs_, st);
    return s;
}

// ---- manifest ----

Manifest::Manifest(fs::path dir, std::string subcommand, const RunConfig& cfg)
    : dir_(std::move(dir)), sub_(std::move(subcommand)), cfg_text_(serialize_config(cfg)), threads_(cfg.threads) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw Error(ErrorKind::IoError, "cannot create output directory " + dir_.string());
}

void Manifest::write(const std::string& name, const std::string& bytes) {
    const fs::path p = dir_ / name;
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    os.write(bytes.data(), std::streamsize(bytes.size()));
    if (!os) throw Error(ErrorKind::IoError, "cannot write " + p.string());
    entries_.emplace_back(name, hex64(fnv1a64(bytes)));
    sizes_.push_back(bytes.size());
}

void Manifest::finish(double wall_seconds, int exit_code) const {
    nlohmann::ordered_json j;
    j["subcommand"] = sub_;
    j["version"] = kVersion;
    j["compiler"] = __VERSION__;
    j["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                 std::to_string(EIGEN_MINOR_VERSION);
    j["threads"] = threads_;
    j["wall_time_s"] = wall_seconds;
    j["exit_code"] = exit_code;
    j["config"] = cfg_text_;
    j["artifacts"] = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < entries_.size(); ++k)
        j["artifacts"].push_back({{"file", entries_[k].first}, {"bytes", sizes_[k]}, {"fnv1a64", entries_[k].second}});
    const fs::path p = dir_ / ("manifest_" + sub_ + ".json");
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    os << j.dump(2) << '\n';
    if (!os) throw Error(ErrorKind::IoError, "cannot write " + p.string());
}

std::vector<ManifestCheck> check_manifests(const fs::path& dir) {
    std::vector<ManifestCheck> out;
    if (!fs::is_directory(dir)) return out;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        const std::string n = e.path().filename().string();
        if (n.rfind("manifest_", 0) == 0 && e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& mf : files) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(read_file(mf));
        } catch (const std::exception& e) {
            out.push_back({mf.filename().string(), "", false, std::string("unreadable: ") + e.what()});
            continue;
        }
        for (const auto& a : j.value("artifacts", nlohmann::json::array())) {
            ManifestCheck c{mf.filename().string(), a.value("file", ""), false, ""};
            const fs::path p = dir / c.file;
            if (!fs::exists(p)) {
                c.detail = "missing";
            } else {
                const std::string h = hex64(fnv1a64(read_file(p)));
                c.ok = h == a.value("fnv1a64", "");
                c.detail = c.ok ? "hash ok" : "hash " + h + " != recorded " + a.value("fnv1a64", "");
            }
            out.push_back(c);
        }
    }
    return out;
}

// ---- subcommands ----

namespace {

struct Context {
    RunConfig cfg;
    std::ostream& out;
    std::ostream& err;
    RadialProfile Q;
    SolitonConstants cQ;

    Context(RunConfig c, std::ostream& o, std::ostream& e) : cfg(std::move(c)), out(o), err(e) {
        Q = shoot_soliton(2.0);
        cQ = soliton_constants(Q, Q);
    }
    ProblemParams params(double q) const {
        RunConfig c = cfg;
        c.q = q;
        return c.params(cQ.a_star);
    }
    double a() const { return cfg.a.value_or(0.5 * cQ.a_star); }
};

std::string csv_row(std::initializer_list<double> v) {
    std::string s;
    bool first = true;
    for (double x : v) {
        s += (first ? "" : ",") + fmt17(x);
        first = false;
    }
    return s + "\n";
}

int cmd_constants(Context& ctx, Manifest& man) {
    const auto& qs = ctx.cfg.q_list;
    std::vector<std::string> rows(qs.size());
    parallel_for(int(qs.size()), ctx.cfg.threads, [&](int k) {
        const double q = qs[std::size_t(k)];
        const auto c = soliton_constants(shoot_soliton(q), ctx.Q);
        rows[std::size_t(k)] = csv_row({q, c.u0, c.norm2_sq, c.a_q_star, tau_q(ctx.a(), c), c_tilde(ctx.a(), c),
                                        c.grad_sq, c.pohozaev_res});
    });
    std::string csv = "q,u0,norm2_sq,a_q_star,tau_q,c_tilde_q,grad_sq,pohozaev_res\n";
    for (const auto& r : rows) csv += r;
    man.write("constants.csv", csv);
    ctx.out << csv;
    return 0;
}

int cmd_groundstate(Context& ctx, Manifest& man) {
    const double q = ctx.cfg.q;
    const auto prof = shoot_soliton(q);
    const auto c = soliton_constants(prof, ctx.Q);
    std::string csv = "r,u,du\n";
    for (std::size_t k = 0; k < prof.r.size(); ++k) csv += csv_row({prof.r[k], prof.u[k], prof.du[k]});
    man.write("profile_q" + exact(q) + ".csv", csv);
    const std::string dq = exact(q);
    ctx.out << "q=" << dq << " u0=" << fmt17(c.u0) << " norm2_sq=" << fmt17(c.norm2_sq)
            << " a_q_star=" << fmt17(c.a_q_star) << " h1_distance_to_Q=" << fmt17(h1_distance(prof, ctx.Q))
            << " pohozaev_res=" << fmt17(c.pohozaev_res) << '\n';
    return 0;
}

int cmd_path_energy(Context& ctx, Manifest& man) {
    const auto p = ctx.params(ctx.cfg.q);
    const auto prof = shoot_soliton(p.q);
    const auto c = soliton_constants(prof, ctx.Q);
    PathOptions opt;
    opt.w_nodes = ctx.cfg.nx;
    opt.w_half = ctx.cfg.L;
    opt.anchor = ctx.cfg.seed_x0;
    const PathSpec path = build_path(p, bump(opt.bump_radius, opt.bump_nodes), prof, c, opt);
    const PathMax pm = path_max(path);
    std::string csv = "segment,param,t,energy,mass,grad_sq\n";
    for (const auto& s : pm.samples)
        csv += std::string(to_string(s.segment)) + "," + fmt17(s.param) + "," + fmt17(s.t) + "," + fmt17(s.energy) +
               "," + fmt17(s.mass) + "," + fmt17(s.grad_sq) + "\n";
    const double t2 = path.tau * path.tau;
    std::ostringstream sum;
    sum << "# summary t_star=" << fmt17(pm.t_q) << " E_max=" << fmt17(pm.E_max)
        << " lower_bound=" << fmt17(pm.lower) << " upper_bound_stmt=" << fmt17(pm.lower + path.K_stmt() / t2)
        << " upper_bound_proof=" << fmt17(pm.lower + path.K_proof() / t2) << " segment=" << to_string(pm.segment)
        << " E_start=" << fmt17(pm.E_start) << " E_end=" << fmt17(pm.E_end)
        << " t1_capped=" << (path.t1_capped ? 1 : 0) << " g1_max=" << fmt17(pm.g1_max)
        << " g1_bound=" << fmt17(pm.g1_bound) << '\n';
    csv += sum.str();
    man.write("path_q" + exact(p.q) + ".csv", csv);
    ctx.out << sum.str();
    return 0;
}

void write_solution(Manifest& man, const SolveReport& r, const ProblemParams& p) {
    std::ostringstream f;
    write_field(f, r.u_q);
    man.write(field_name(r.q), f.str());
    man.write(report_name(r.q), report_text(r, p, field_name(r.q)));
}

int cmd_solve2d(Context& ctx, Manifest& man) {
    const auto p = ctx.params(ctx.cfg.q);
    try {
        const SolveReport r = solve(ctx.cfg.solve_config(), p, ctx.Q);
        write_solution(man, r, p);
        ctx.out << report_text(r, p, field_name(r.q));
        return 0;
    } catch (const SolveFailure& e) {
        if (const SolveReport* b = e.best()) {
            std::ostringstream f;
            write_field(f, b->u_q);
            man.write("failed_" + field_name(b->q), f.str());
            man.write("failed_" + report_name(b->q), report_text(*b, p, "failed_" + field_name(b->q)));
        }
        throw;
    }
}

std::string asymptotics_csv(const ConvergenceTable& t) {
    std::string csv = "q,tau_q,eps,grad_ratio,ring_defect,mu_scaled,profile_err_L2,beta_hat,bracket_verdict\n";
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
        const auto& b = t.rows[k];
        std::string row = csv_row({b.q, b.tau, b.eps, b.grad_ratio, b.ring_defect, b.mu_scaled, b.profile_err_L2,
                                   b.beta_hat});
        row.pop_back();
        csv += row + "," + to_string(t.brackets[k].verdict) + "\n";
    }
    return csv;
}

void print_table_summary(std::ostream& os, const ConvergenceTable& t) {
    os << "C1=" << fmt17(t.C1) << " C2=" << fmt17(t.C2) << (t.C2_slack ? " (slack)" : "") << '\n';
    for (const auto& v : t.violations) os << "trend " << v.column << ": " << v.detail << '\n';
}

int cmd_sweep(Context& ctx, Manifest& man) {
    const auto p = ctx.params(ctx.cfg.q_list.front());
    const auto reps = continuation_sweep(ctx.cfg.solve_config(), p, ctx.Q, ctx.cfg.q_list);
    for (const auto& r : reps) {
        ProblemParams pq = p;
        pq.q = r.q;
        write_solution(man, r, pq);
    }
    const auto t = convergence_table(reps, ctx.Q, p);
    const std::string csv = asymptotics_csv(t);
    man.write("asymptotics.csv", csv);
    // empirical epsilon_0: largest q of the list whose state passes the bracket and Pohozaev checks
    std::optional<double> eps0;
    for (const auto& r : reps)
        if (r.in_bracket() && r.pohozaev_res < ctx.cfg.tol_pohozaev && (!eps0 || r.q > *eps0)) eps0 = r.q;
    std::ostringstream sum;
    print_table_summary(sum, t);
    if (eps0) sum << "largest_passing_q=" << exact(*eps0) << " eps0_empirical=" << std::setprecision(12) << *eps0 - 2.0 << '\n';
    else sum << "largest_passing_q=none\n";
    man.write("sweep_summary.txt", sum.str());
    ctx.out << csv << sum.str();
    return 0;
}

int cmd_asymptotics(Context& ctx, Manifest& man, const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error(ErrorKind::IoError, "reports directory not found: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        const std::string n = e.path().filename().string();
        if (n.rfind("report_q", 0) == 0 && e.path().extension() == ".txt") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<SolveReport> reps;
    ProblemParams p;
    for (const auto& f : files) {
        StoredReport s = read_report(f);
        p = s.params;
        reps.push_back(std::move(s.report));
    }
    const auto t = convergence_table(reps, ctx.Q, p);
    const std::string csv = asymptotics_csv(t);
    man.write("asymptotics.csv", csv);
    ctx.out << csv;
    print_table_summary(ctx.out, t);
    return 0;
}

// ---- verify: desk-scale property suite ----

struct CheckRow {
    std::string name;
    bool ok = false;
    std::string detail;
};

Field random_field(const Grid& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const Point c = g.center();
    const double w = g.hx * (g.nx - 1);
    std::vector<std::array<double, 4>> b;
    for (int k = 0; k < 3; ++k)
        b.push_back({c.x() + (U(rng) - 0.5) * 0.4 * w, c.y() + (U(rng) - 0.5) * 0.4 * w, 0.05 * w * (1.0 + U(rng)),
                     (0.5 + U(rng)) * (U(rng) < 0.3 ? -0.4 : 1.0)});
    Field u = sample(g, [&](const Point& x) {
        double s = 0.0;
        for (const auto& p : b) s += p[3] * std::exp(-((x - Point(p[0], p[1])).squaredNorm()) / (2 * p[2] * p[2]));
        return s;
    });
    u.values() /= std::sqrt(mass(u));
    return u;
}

std::vector<CheckRow> property_suite(Context& ctx, std::string& table) {
    std::vector<CheckRow> rows;
    auto check = [&](const std::string& name, auto&& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        CheckRow r{name, false, ""};
        try {
            std::ostringstream d;
            r.ok = fn(d);
            r.detail = d.str();
        } catch (const std::exception& e) {
            r.detail = e.what();
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::ostringstream line;
        line << (r.ok ? "PASS  " : "FAIL  ") << r.name << "  [" << r.detail << "]";
        ctx.err << line.str() << "  (" << std::fixed << std::setprecision(1) << s << " s)\n";
        table += line.str() + "\n";
        rows.push_back(r);
    };

    const std::vector<double> qs{3.0, 2.5, 2.2, 2.1, 2.05};
    std::map<double, RadialProfile> prof;
    std::vector<RadialProfile> shot(qs.size());
    parallel_for(int(qs.size()), ctx.cfg.threads, [&](int k) { shot[std::size_t(k)] = shoot_soliton(qs[std::size_t(k)]); });
    for (std::size_t k = 0; k < qs.size(); ++k) prof[qs[k]] = shot[k];

    check("soliton Pohozaev identities below 1e-6", [&](std::ostream& d) {
        double worst = 0.0;
        for (double q : qs) worst = std::max(worst, soliton_constants(prof[q], ctx.Q).pohozaev_res);
        d << "max defect " << worst;
        return worst < 1e-6;
    });
    check("phi_q -> Q in H1 and a_q* -> a* monotonically", [&](std::ostream& d) {
        double ph = 1e300, pa = 1e300;
        bool ok = true;
        for (double q : qs) {
            const double h = h1_distance(prof[q], ctx.Q);
            const double da = std::abs(soliton_constants(prof[q], ctx.Q).a_q_star - ctx.cQ.a_star);
            ok = ok && h < ph && da < pa;
            ph = h;
            pa = da;
        }
        const double rel = ph / h1_norm(ctx.Q);
        d << "terminal H1 distance / |Q|_H1 = " << rel;
        return ok && rel < 0.1;
    });
    check("V = 0 dilation maximum equals (q-2)/(2q) tau^2 at t = 1", [&](std::ostream& d) {
        double wv = 0.0, wt = 0.0;
        for (double q : {2.2, 2.5, 3.0}) {
            const auto c = soliton_constants(prof[q], ctx.Q);
            const double a = 0.5 * ctx.cQ.a_star, tau = tau_q(a, c);
            const auto m = vzero_scaled_max(prof[q], tau, a);
            wv = std::max(wv, std::abs(m.value / c_tilde(a, c) - 1.0));
            wt = std::max(wt, std::abs(m.t - 1.0));
        }
        d << "rel value err " << wv << ", |t*-1| " << wt;
        return wv < 1e-5 && wt < 1e-4;
    });

    std::mt19937_64 rng(ctx.cfg.seed);
    ProblemParams p22 = ctx.params(2.2);
    const Grid g = Grid::centered(Point(0.4, 0), 3.0, 3.0, 128, 128);
    const Grid g4 = Grid::centered(Point(0.4, 0), 3.0, 3.0, 129, 129, Stencil::fourth_order);
    std::vector<Field> fields, fields4;
    for (int k = 0; k < 10; ++k) fields.push_back(random_field(g, rng));
    for (int k = 0; k < 10; ++k) fields4.push_back(random_field(g4, rng));
    check("sphere-tangent gradient matches finite differences", [&](std::ostream& d) {
        double worst = 0.0;
        for (const auto& u : fields) {
            const Field tg = tangent_gradient(u, p22);
            Field v = random_field(g, rng);
            v.values() -= inner(v, u) * u.values();
            const double e = 1e-4;
            Field up(u), um(u);
            up.values() += e * v.values();
            um.values() -= e * v.values();
            const double fd = (energy(up, p22).total - energy(um, p22).total) / (2 * e);
            worst = std::max(worst, std::abs(inner(tg, v) - fd) / std::abs(fd));
        }
        d << "max rel err " << worst;
        return worst < 1e-6;
    });
    check("d/ds augmented energy at s = 0 equals Q_q", [&](std::ostream& d) {
        double worst = 0.0;
        for (const auto& u : fields4) {
            const double h = 1e-4;
            const double der = (augmented_energy(u, h, p22) - augmented_energy(u, -h, p22)) / (2 * h);
            const double Qv = pohozaev_Q(u, p22);
            worst = std::max(worst, std::abs(der - Qv) / (1.0 + std::abs(Qv)));
        }
        d << "max rel err " << worst;
        return worst < 1e-5;
    });
    check("energy identity q E - Q closes on shared quadrature", [&](std::ostream& d) {
        double worst = 0.0;
        for (const auto& u : fields) {
            const auto [l, r] = identity_321(u, p22);
            worst = std::max(worst, std::abs(l - r) / std::abs(l));
        }
        d << "max rel defect " << worst;
        return worst < 1e-10;
    });
    check("second moment: radial vs 2D quadrature", [&](std::ostream& d) {
        const Grid gq = Grid::centered(Point(0, 0), 16.0, 16.0, 641, 641);
        const Field u = sample(gq, [&](const Point& x) { return ctx.Q(x.norm()); });
        const Field r2 = sample(gq, [](const Point& x) { return x.squaredNorm(); });
        const double m2 = (r2.values() * u.values().square()).sum() / u.values().square().sum();
        const double rel = std::abs(m2 / ctx.cQ.second_moment - 1.0);
        d << "rel diff " << rel;
        return rel < 1e-4;
    });

    const double q = ctx.cfg.q;
    const auto p = ctx.params(q);
    const auto prof_q = shoot_soliton(q);
    const auto cq = soliton_constants(prof_q, ctx.Q);
    check("energy path: maximum on g3 inside the bracket", [&](std::ostream& d) {
        PathOptions opt;
        opt.w_nodes = ctx.cfg.nx;
        opt.w_half = ctx.cfg.L;
        opt.anchor = ctx.cfg.seed_x0;
        const PathSpec path = build_path(p, bump(opt.bump_radius, opt.bump_nodes), prof_q, cq, opt);
        const PathMax m = path_max(path);
        const double t2 = path.tau * path.tau;
        const double K = std::max(path.K_stmt(), path.K_proof());
        const double h = 2.0 * opt.w_half / path.tau / (opt.w_nodes - 1);
        d << "t_q " << m.t_q << ", excess " << m.excess_scaled;
        return m.segment == Segment::g3 && m.E_start < m.E_max && m.E_end < m.E_max &&
               m.E_max >= m.lower - 1e-3 * t2 && m.excess_scaled <= 1.5 * K &&
               std::abs(m.t_q - 1.0) <= std::pow(path.tau, -1.5) + 10 * h;
    });

    SolveReport sol;
    bool solved = false;
    check("excited state: residual, Pohozaev, positivity, mu < lambda_1, bracket", [&](std::ostream& d) {
        sol = solve(ctx.cfg.solve_config(), p, ctx.Q);
        solved = true;
        d << "residual " << sol.residual_inf << ", pohozaev " << sol.pohozaev_res << ", excess " << sol.excess_scaled;
        return sol.residual_inf < 1e-8 && sol.pohozaev_res < 1e-4 && sol.min_value > 0.0 && sol.mu_q < sol.lambda1 &&
               sol.in_bracket();
    });
    check("concentration on the ring and profile close to Q", [&](std::ostream& d) {
        if (!solved) throw Error(ErrorKind::NoConvergence, "no solution");
        const auto b = blowup_rescale(sol, ctx.Q, p);
        const double h = sol.u_q.grid().hx;
        const Point target(std::copysign(p.b1 * p.A, sol.x0.x()), 0.0);
        d << "|x_c - x0| / h " << (b.x_c - target).norm() / h << ", profile err " << b.profile_err_L2;
        return (b.x_c - target).norm() < 3 * h && b.profile_err_L2 < 0.15 && b.mu_scaled < 0.0;
    });
    check("FIELD2D dump round-trips bit-exactly", [&](std::ostream& d) {
        const Field& u = solved ? sol.u_q : fields.front();
        std::stringstream s;
        write_field(s, u);
        const Field v = read_field(s, u.grid().stencil);
        const bool same = v.grid() == u.grid() && std::memcmp(v.values().data(), u.values().data(),
                                                              std::size_t(u.values().size()) * sizeof(double)) == 0;
        d << u.grid().nx << "x" << u.grid().ny;
        return same;
    });
    check("config serialization round-trips", [&](std::ostream& d) {
        const RunConfig back = parse_config(serialize_config(ctx.cfg));
        d << serialize_config(ctx.cfg).size() << " bytes";
        return back == ctx.cfg;
    });
    check("manifests re-derive", [&](std::ostream& d) {
        const auto ms = check_manifests(ctx.cfg.out);
        std::size_t bad = 0;
        for (const auto& m : ms)
            if (!m.ok) {
                ++bad;
                d << m.manifest << ":" << m.file << " " << m.detail << "; ";
            }
        d << ms.size() << " artifacts, " << bad << " bad";
        return bad == 0;
    });
    table += "NOTE  the ring term |x|_b (|x|_b - A) u^2 of the energy identity enters with coefficient 2; "
             "with coefficient 1 the two sides differ by half its integral\n";
    return rows;
}

int cmd_verify(Context& ctx, Manifest& man) {
    std::string table;
    const auto rows = property_suite(ctx, table);
    const auto fails = std::count_if(rows.begin(), rows.end(), [](const CheckRow& r) { return !r.ok; });
    man.write("verify.txt", table);
    ctx.out << table << (fails ? "verify: " + std::to_string(fails) + " check(s) failed\n" : "verify: all checks passed\n");
    return fails ? 1 : 0;
}

int exit_code_for(ErrorKind k) {
    switch (k) {
        case ErrorKind::ParseError:
        case ErrorKind::RangeError:
        case ErrorKind::IoError: return 2;
        default: return 1;
    }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Normalized excited states of the supercritical GP equation with an ellipse potential", "gpx"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path, out_dir, q_list, reports, a_opt;
    std::optional<double> q_opt;
    std::optional<int> threads;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> sets;
    app.add_option("--config", config_path, "flat key=value config file");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "worker threads");
    app.add_option("--seed", seed, "seed for random property-test fields");
    app.add_option("--set", sets, "key=value override")->take_all();

    auto* c_const = app.add_subcommand("constants", "soliton constants per q (CSV)");
    c_const->add_option("--q-list", q_list, "comma separated q values");
    c_const->add_option("--a", a_opt, "coupling a, or auto for a*/2");
    auto* c_ground = app.add_subcommand("groundstate", "radial profile phi_q (CSV)");
    c_ground->add_option("--q", q_opt);
    auto* c_path = app.add_subcommand("path-energy", "energy along the constructed path (CSV)");
    c_path->add_option("--q", q_opt);
    auto* c_solve = app.add_subcommand("solve2d", "2D excited state: report and field dump");
    c_solve->add_option("--q", q_opt);
    auto* c_sweep = app.add_subcommand("sweep", "continuation sweep plus asymptotics CSV");
    c_sweep->add_option("--q", q_list, "comma separated decreasing q values");
    auto* c_asym = app.add_subcommand("asymptotics", "asymptotics CSV from stored reports");
    c_asym->add_option("--reports", reports, "directory holding report_q*.txt");
    app.add_subcommand("verify", "property suite with a pass/fail table");

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? 0 : 2;
    }

    const std::string sub = app.get_subcommands().front()->get_name();
    const auto t0 = std::chrono::steady_clock::now();
    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
        try {
            for (const auto& s : sets) {
                const auto eq = s.find('=');
                if (eq == std::string::npos) throw BadValue{"--set expects key=value, got '" + s + "'"};
                set_key(cfg, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
            }
            if (!q_list.empty()) set_key(cfg, "q_list", q_list);
            if (!a_opt.empty()) set_key(cfg, "a", a_opt);
        } catch (const BadValue& b) {
            throw Error(ErrorKind::ParseError, "command line: " + b.why);
        }
        if (q_opt) cfg.q = *q_opt;
        if (threads) cfg.threads = *threads;
        if (seed) cfg.seed = *seed;
        if (!out_dir.empty()) cfg.out = out_dir;
        if (const char* env = std::getenv("GP_EXCITED_THREADS")) {
            try {
                cfg.threads = to_int<int>(trim(env));
            } catch (const BadValue& b) {
                throw Error(ErrorKind::RangeError, "GP_EXCITED_THREADS = " + std::string(env) + ": " + b.why);
            }
        }
        cfg.validate();

        Context ctx(cfg, out, err);
        Manifest man(cfg.out, sub, cfg);
        int rc = 0;
        try {
            if (sub == "constants") rc = cmd_constants(ctx, man);
            else if (sub == "groundstate") rc = cmd_groundstate(ctx, man);
            else if (sub == "path-energy") rc = cmd_path_energy(ctx, man);
            else if (sub == "solve2d") rc = cmd_solve2d(ctx, man);
            else if (sub == "sweep") rc = cmd_sweep(ctx, man);
            else if (sub == "asymptotics") rc = cmd_asymptotics(ctx, man, reports.empty() ? fs::path(cfg.out) : fs::path(reports));
            else if (sub == "verify") rc = cmd_verify(ctx, man);
        } catch (const Error& e) {
            rc = exit_code_for(e.kind());
            err << "error: " << e.what() << '\n';
        }
        man.finish(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), rc);
        return rc;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace gpx
