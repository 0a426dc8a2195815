#pragma once

// votelab command line: solve, table, curve, simulate, thresholds.
// Exit codes: 0 success, 2 usage/validation, 3 numeric failure.

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "votelab/asymptotics.hpp"
#include "votelab/conventional.hpp"
#include "votelab/delegation.hpp"
#include "votelab/montecarlo.hpp"
#include "votelab/solver.hpp"

namespace votelab::cli {

inline constexpr const char* tool_version = "0.1.0";

enum exit_code : int { ok = 0, usage = 2, numeric = 3 };

using json = nlohmann::ordered_json;

/// 12 significant digits, '.' separator, no locale.
inline std::string fmt(double x) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 12);
    return std::string(buf, r.ptr);
}

inline std::string fmt_fixed(double x, int decimals) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, decimals);
    return std::string(buf, r.ptr);
}

// JSON numbers carry the same 12 digits as CSV.
inline json jnum(double x) {
    if (!std::isfinite(x)) return nullptr;
    const std::string s = fmt(x);
    double y = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), y);
    return y;
}

inline json jnum(const std::optional<double>& x) { return x ? jnum(*x) : json(nullptr); }

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Options shared by the subcommands.
struct Common {
    std::string format = "csv";
    std::string out_path;
    double eps = TruncationPolicy::default_tail_eps;
    std::size_t max_terms = TruncationPolicy::default_max_terms;

    TruncationPolicy trunc() const {
        TruncationPolicy t{eps, max_terms};
        t.validate();
        return t;
    }

    json config() const {
        return {{"tail_eps", jnum(eps)}, {"max_terms", max_terms}, {"format", format}};
    }
};

inline void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--out", c.out_path, "Write data to PATH instead of stdout");
    sub->add_option("--eps", c.eps, "Tail budget for truncated Poisson sums")->envname("VOTELAB_EPS");
    sub->add_option("--max-terms", c.max_terms, "Cap on terms per truncated sum");
}

/// Output of one command: data plus manifest. JSON embeds the manifest;
/// CSV written to a file gets a PATH.manifest.json sidecar.
struct Emitted {
    std::string csv;
    json data = json::object();
};

inline json manifest(const std::string& command, json params, json config) {
    return {{"command", command},
            {"params", std::move(params)},
            {"config", std::move(config)},
            {"tool_version", tool_version},
            {"timestamp", utc_timestamp()}};
}

inline void emit(const Common& c, const json& man, Emitted e, std::ostream& out) {
    std::string body;
    if (c.format == "json") {
        json doc = {{"manifest", man}};
        for (auto& [k, v] : e.data.items()) doc[k] = v;
        body = doc.dump(2) + "\n";
    } else {
        body = std::move(e.csv);
    }
    if (c.out_path.empty()) {
        out << body;
        return;
    }
    std::ofstream f(c.out_path, std::ios::binary);
    if (!f) throw domain_error("cannot open output file " + c.out_path);
    f << body;
    if (c.format == "csv") {
        std::ofstream m(c.out_path + ".manifest.json", std::ios::binary);
        if (!m) throw domain_error("cannot open manifest file " + c.out_path + ".manifest.json");
        m << man.dump(2) << "\n";
    }
}

inline std::optional<Game> parse_game(const std::string& s) {
    if (s == "delegation") return Game::delegation;
    if (s == "conventional") return Game::conventional;
    return std::nullopt;
}

inline json report_json(const EquilibriumReport& r) {
    json roots = json::array();
    for (const auto& e : r.roots) {
        roots.push_back({{"strategy_prob", jnum(e.strategy_prob)},
                         {"win_prob", jnum(e.win_prob.value())},
                         {"welfare", jnum(e.welfare)}});
    }
    return {{"game", std::string(to_string(r.game))},
            {"params", {{"n", jnum(r.params.n())}, {"f", r.params.f()}, {"c", jnum(r.params.c())}}},
            {"roots", roots},
            {"corner_note", std::string(to_string(r.corner_note))}};
}

// --- solve -----------------------------------------------------------------

struct SolveArgs {
    Common common;
    double n = 0.0;
    std::int64_t f = 0;
    double c = 0.0;
    std::string game = "both";
    std::size_t grid = SolverConfig::default_grid_points;
};

inline int cmd_solve(const SolveArgs& a, std::ostream& out) {
    const GameParams params(a.n, a.f, a.c);
    SolverConfig cfg;
    cfg.grid_points = a.grid;
    cfg.validate();
    const auto trunc = a.common.trunc();

    std::vector<EquilibriumReport> reports;
    if (a.game != "conventional") reports.push_back(solve_delegation(params, cfg, trunc));
    if (a.game != "delegation") reports.push_back(solve_conventional(params, cfg, trunc));

    Emitted e;
    e.csv = "game,strategy_prob,win_prob,welfare,corner_note\n";
    json js = json::array();
    for (const auto& r : reports) {
        const std::string g(to_string(r.game));
        const std::string note(to_string(r.corner_note));
        if (r.roots.empty()) e.csv += g + ",,,," + note + "\n";
        for (const auto& root : r.roots) {
            e.csv += g + "," + fmt(root.strategy_prob) + "," + fmt(root.win_prob.value()) + "," +
                     fmt(root.welfare) + "," + note + "\n";
        }
        js.push_back(report_json(r));
    }
    e.data["reports"] = js;

    json config = a.common.config();
    config["grid_points"] = cfg.grid_points;
    config["root_tol"] = jnum(cfg.root_tol);
    config["merge_tol"] = jnum(cfg.merge_tol);
    emit(a.common, manifest("solve", {{"n", jnum(a.n)}, {"f", a.f}, {"c", jnum(a.c)}, {"game", a.game}}, config),
         std::move(e), out);
    return ok;
}

// --- table -----------------------------------------------------------------

struct TableArgs {
    Common common;
    double n = 0.0;
    double c = 0.0;
    std::int64_t f_min = 1;
    std::int64_t f_max = 20;
    std::size_t grid = SolverConfig::default_grid_points;
    std::optional<int> round;
};

inline int cmd_table(const TableArgs& a, std::ostream& out, std::ostream& err) {
    if (a.f_min < 1 || a.f_max < a.f_min) throw domain_error("need 1 <= f-min <= f-max");
    if (a.round && (*a.round < 0 || *a.round > 12)) throw domain_error("--round must lie in 0..12");
    SolverConfig cfg;
    cfg.grid_points = a.grid;
    cfg.validate();
    const auto rows = sweep_f(a.n, a.c, a.f_min, a.f_max, cfg, a.common.trunc());

    auto cell = [&](const std::optional<double>& v) -> std::string {
        if (!v) return "";
        return a.round ? fmt_fixed(*v, *a.round) : fmt(*v);
    };
    auto jcell = [&](const std::optional<double>& v) -> json {
        if (!v) return nullptr;
        if (!a.round) return jnum(*v);
        const std::string s = fmt_fixed(*v, *a.round);
        double y = 0.0;
        std::from_chars(s.data(), s.data() + s.size(), y);
        return y;
    };

    Emitted e;
    e.csv = "f,p1,p2,Wd1,Wd2,q1,q2,Wc1,Wc2\n";
    json js = json::array();
    bool failed = false;
    for (const auto& row : rows) {
        TableCells d, k;
        if (row.delegation) d = table_cells(*row.delegation);
        if (row.conventional) k = table_cells(*row.conventional);
        e.csv += std::to_string(row.f) + "," + cell(d.win1) + "," + cell(d.win2) + "," + cell(d.welfare1) + "," +
                 cell(d.welfare2) + "," + cell(k.win1) + "," + cell(k.win2) + "," + cell(k.welfare1) + "," +
                 cell(k.welfare2) + "\n";
        json jr = {{"f", row.f},        {"p1", jcell(d.win1)}, {"p2", jcell(d.win2)},
                   {"Wd1", jcell(d.welfare1)}, {"Wd2", jcell(d.welfare2)}, {"q1", jcell(k.win1)},
                   {"q2", jcell(k.win2)}, {"Wc1", jcell(k.welfare1)}, {"Wc2", jcell(k.welfare2)}};
        if (!row.delegation_error.empty()) {
            failed = true;
            jr["delegation_error"] = row.delegation_error;
            err << "f=" << row.f << " delegation: " << row.delegation_error << "\n";
        }
        if (!row.conventional_error.empty()) {
            failed = true;
            jr["conventional_error"] = row.conventional_error;
            err << "f=" << row.f << " conventional: " << row.conventional_error << "\n";
        }
        js.push_back(jr);
    }
    e.data["rows"] = js;

    json params = {{"n", jnum(a.n)}, {"c", jnum(a.c)}, {"f_min", a.f_min}, {"f_max", a.f_max}};
    json config = a.common.config();
    config["grid_points"] = cfg.grid_points;
    config["root_tol"] = jnum(cfg.root_tol);
    config["merge_tol"] = jnum(cfg.merge_tol);
    config["round"] = a.round ? json(*a.round) : json(nullptr);
    emit(a.common, manifest("table", params, config), std::move(e), out);
    return failed ? numeric : ok;
}

// --- curve -----------------------------------------------------------------

struct CurveArgs {
    Common common;
    std::string game;
    double n = 0.0;
    std::int64_t f = 0;
    double c = 0.14;
    std::size_t grid = 201;
};

inline int cmd_curve(const CurveArgs& a, std::ostream& out) {
    const auto game = parse_game(a.game);
    if (!game) throw domain_error("--game must be delegation or conventional");
    const GameParams params(a.n, a.f, a.c);
    const auto s = sample_curve(*game, params, a.grid, a.common.trunc());

    Emitted e;
    e.csv = "strategy,value,cost\n";
    json xs = json::array();
    json ys = json::array();
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        e.csv += fmt(s.strategy_grid[i]) + "," + fmt(s.values[i]) + "," + fmt(s.cost_line) + "\n";
        xs.push_back(jnum(s.strategy_grid[i]));
        ys.push_back(jnum(s.values[i]));
    }
    e.data["strategy_grid"] = xs;
    e.data["values"] = ys;
    e.data["cost_line"] = jnum(s.cost_line);

    json params_echo = {{"game", a.game}, {"n", jnum(a.n)}, {"f", a.f}, {"c", jnum(a.c)}, {"grid", a.grid}};
    emit(a.common, manifest("curve", params_echo, a.common.config()), std::move(e), out);
    return ok;
}

// --- simulate ----------------------------------------------------------------

struct SimulateArgs {
    Common common;
    std::string game;
    double n = 0.0;
    std::int64_t f = 0;
    std::optional<double> c;
    std::optional<double> gamma;
    std::optional<double> alpha;
    std::uint64_t trials = 1'000'000;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

inline int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
    const auto game = parse_game(a.game);
    if (!game) throw domain_error("--game must be delegation or conventional");
    if (*game == Game::delegation && (!a.gamma || a.alpha)) throw domain_error("delegation needs --gamma (and no --alpha)");
    if (*game == Game::conventional && (!a.alpha || a.gamma)) throw domain_error("conventional needs --alpha (and no --gamma)");
    // The cost only enters the welfare estimate; 1.0 is a placeholder otherwise.
    const GameParams params(a.n, a.f, a.c.value_or(1.0));
    const double s = *game == Game::delegation ? *a.gamma : *a.alpha;
    detail::require_unit_interval(s, *game == Game::delegation ? "gamma" : "alpha");
    const SimConfig sim{a.trials, a.seed, a.threads};
    sim.validate();
    const auto trunc = a.common.trunc();

    struct Row {
        std::string quantity;
        Estimate est;
        double analytic;
    };
    std::vector<Row> rows;
    if (*game == Game::delegation) {
        const auto o = evaluate_delegation(params, s, trunc);
        rows.push_back({"win_prob", estimate_win_prob(params, s, sim), o.win_prob.value()});
        rows.push_back({"voting_gain", estimate_voting_gain(params, s, sim), xi(params, s, trunc).xi});
        if (a.c) rows.push_back({"welfare", estimate_welfare(params, s, Game::delegation, sim), o.welfare});
    } else {
        rows.push_back({"win_prob", estimate_win_prob_conventional(params, s, sim),
                        win_prob_conventional(params, s, trunc).value()});
        if (a.c) {
            rows.push_back({"welfare", estimate_welfare(params, s, Game::conventional, sim),
                            welfare_conventional(params, s, trunc)});
        }
    }

    Emitted e;
    e.csv = "quantity,mean,stderr,trials,analytic,z\n";
    json js = json::array();
    for (const auto& r : rows) {
        std::optional<double> z;
        if (r.est.std_err > 0.0) z = (r.est.mean - r.analytic) / r.est.std_err;
        e.csv += r.quantity + "," + fmt(r.est.mean) + "," + fmt(r.est.std_err) + "," + std::to_string(r.est.trials) +
                 "," + fmt(r.analytic) + "," + (z ? fmt(*z) : std::string()) + "\n";
        js.push_back({{"quantity", r.quantity},
                      {"mean", jnum(r.est.mean)},
                      {"stderr", jnum(r.est.std_err)},
                      {"trials", r.est.trials},
                      {"analytic", jnum(r.analytic)},
                      {"z", jnum(z)}});
    }
    e.data["estimates"] = js;

    json params_echo = {{"game", a.game}, {"n", jnum(a.n)}, {"f", a.f}};
    params_echo["c"] = a.c ? jnum(*a.c) : json(nullptr);
    params_echo[*game == Game::delegation ? "gamma" : "alpha"] = jnum(s);
    params_echo["trials"] = a.trials;
    params_echo["seed"] = a.seed;
    json config = a.common.config();
    config["threads"] = a.threads;
    emit(a.common, manifest("simulate", params_echo, config), std::move(e), out);
    return ok;
}

// --- thresholds --------------------------------------------------------------

struct ThresholdArgs {
    Common common;
    double c = 0.0;
    double delta = 1.0;
    std::optional<double> delta_tilde;
    std::optional<double> sigma;
    std::optional<std::int64_t> f;
    std::optional<double> gamma;
    std::optional<double> confidence;
    std::optional<double> n;
};

inline int cmd_thresholds(const ThresholdArgs& a, std::ostream& out) {
    if (a.confidence && !(*a.confidence > 0.0 && *a.confidence < 1.0)) {
        throw domain_error("--confidence must lie in (0, 1)");
    }
    if (a.gamma && !(*a.gamma > 0.0 && *a.gamma <= 1.0)) throw domain_error("--gamma must lie in (0, 1]");
    const double dt = a.delta_tilde.value_or(a.delta);
    const double sg = a.sigma.value_or(a.delta);

    std::vector<std::pair<std::string, json>> kv;
    kv.emplace_back("f_star", f_star(a.c, a.delta));
    if (a.f) {
        const double d1 = d_star_case1(*a.f, a.delta, a.c);
        kv.emplace_back("d_star_case1", jnum(d1));
        kv.emplace_back("d_star_case2_delta_tilde", jnum(d_star_case2(*a.f, dt, a.c)));
        kv.emplace_back("d_star_case2_sigma", jnum(d_star_case2(*a.f, sg, a.c)));
        if (a.gamma && a.confidence) {
            const auto nt = n_thresholds(d1, *a.gamma, *a.confidence);
            kv.emplace_back("n_lo", jnum(nt.n_lo));
            kv.emplace_back("n_hi", jnum(nt.n_hi));
        }
        if (a.n) {
            const GameParams params(*a.n, *a.f, a.c);
            kv.emplace_back("regime", std::string(to_string(regime_classify(params, a.delta))));
        }
    }

    Emitted e;
    e.csv = "quantity,value\n";
    for (const auto& [k, v] : kv) {
        std::string cellv;
        if (v.is_string()) cellv = v.get<std::string>();
        else if (v.is_number_integer()) cellv = v.dump();
        else if (v.is_number()) cellv = fmt(v.get<double>());
        e.csv += k + "," + cellv + "\n";
        e.data[k] = v;
    }

    json params = {{"c", jnum(a.c)}, {"delta", jnum(a.delta)}, {"delta_tilde", jnum(dt)}, {"sigma", jnum(sg)}};
    params["f"] = a.f ? json(*a.f) : json(nullptr);
    params["gamma"] = a.gamma ? jnum(*a.gamma) : json(nullptr);
    params["confidence"] = a.confidence ? jnum(*a.confidence) : json(nullptr);
    params["n"] = a.n ? jnum(*a.n) : json(nullptr);
    emit(a.common, manifest("thresholds", params, a.common.config()), std::move(e), out);
    return ok;
}

// --- entry point -------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Equilibria, welfare and thresholds for vote delegation vs conventional voting", "votelab"};
    app.require_subcommand(1);
    app.set_version_flag("--version", tool_version);

    SolveArgs solve_a;
    auto* solve = app.add_subcommand("solve", "Interior equilibria for one (n, f, c)");
    solve->add_option("--n", solve_a.n, "Expected number of well-behaving agents")->required();
    solve->add_option("--f", solve_a.f, "Number of misbehaving voters")->required();
    solve->add_option("--c", solve_a.c, "Voting cost")->required();
    solve->add_option("--game", solve_a.game)->check(CLI::IsMember({"delegation", "conventional", "both"}));
    solve->add_option("--grid", solve_a.grid, "Root-scan grid points")->envname("VOTELAB_GRID_POINTS");
    add_common(solve, solve_a.common);

    TableArgs table_a;
    auto* table = app.add_subcommand("table", "Equilibrium table over a range of f");
    table->add_option("--n", table_a.n)->required();
    table->add_option("--c", table_a.c)->required();
    table->add_option("--f-min", table_a.f_min);
    table->add_option("--f-max", table_a.f_max);
    table->add_option("--grid", table_a.grid, "Root-scan grid points")->envname("VOTELAB_GRID_POINTS");
    table->add_option("--round", table_a.round, "Round table cells to K decimals");
    add_common(table, table_a.common);

    CurveArgs curve_a;
    auto* curve = app.add_subcommand("curve", "Indifference curve samples for plotting");
    curve->add_option("--game", curve_a.game)->required()->check(CLI::IsMember({"delegation", "conventional"}));
    curve->add_option("--n", curve_a.n)->required();
    curve->add_option("--f", curve_a.f)->required();
    curve->add_option("--c", curve_a.c, "Cost line (default 0.14)");
    curve->add_option("--grid", curve_a.grid, "Number of samples on [0,1]")->envname("VOTELAB_GRID_POINTS");
    add_common(curve, curve_a.common);

    SimulateArgs sim_a;
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimates against the analytic values");
    simulate->add_option("--game", sim_a.game)->required()->check(CLI::IsMember({"delegation", "conventional"}));
    simulate->add_option("--n", sim_a.n)->required();
    simulate->add_option("--f", sim_a.f)->required();
    simulate->add_option("--c", sim_a.c, "Voting cost; enables the welfare estimate");
    simulate->add_option("--gamma", sim_a.gamma, "Delegation probability");
    simulate->add_option("--alpha", sim_a.alpha, "Voting probability");
    simulate->add_option("--trials", sim_a.trials);
    simulate->add_option("--seed", sim_a.seed)->envname("VOTELAB_SEED");
    simulate->add_option("--threads", sim_a.threads, "Worker threads (0: all cores)");
    add_common(simulate, sim_a.common);

    ThresholdArgs thr_a;
    auto* thresholds = app.add_subcommand("thresholds", "Large-electorate threshold quantities");
    thresholds->add_option("--c", thr_a.c)->required();
    thresholds->add_option("--delta", thr_a.delta, "Case-1 slack (>= 1 for f_star)");
    thresholds->add_option("--delta-tilde", thr_a.delta_tilde, "Case-2 narrow slack (default: delta)");
    thresholds->add_option("--sigma", thr_a.sigma, "Case-2 wide slack (default: delta)");
    thresholds->add_option("--f", thr_a.f);
    thresholds->add_option("--gamma", thr_a.gamma);
    thresholds->add_option("--confidence", thr_a.confidence);
    thresholds->add_option("--n", thr_a.n, "Population size for the regime label");
    add_common(thresholds, thr_a.common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : usage;
    }

    try {
        if (*solve) return cmd_solve(solve_a, out);
        if (*table) return cmd_table(table_a, out, err);
        if (*curve) return cmd_curve(curve_a, out);
        if (*simulate) return cmd_simulate(sim_a, out);
        if (*thresholds) return cmd_thresholds(thr_a, out);
    } catch (const votelab::domain_error& e) {
        err << "error: " << e.what() << "\n";
        return usage;
    } catch (const numeric_error& e) {
        err << "numeric failure: " << e.what() << "\n";
        return numeric;
    } catch (const std::exception& e) {
        err << "numeric failure: " << e.what() << "\n";
        return numeric;
    }
    return usage;
}

} // namespace votelab::cli
