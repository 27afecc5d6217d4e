// rmflab: command-line front end for the random-multiplicative-function
// toolkit. Every subcommand emits a CSV table (canonical) or its JSON mirror;
// all randomness is counter-based, so rows are reproducible from the recorded
// seed for any thread count.
//
// Exit codes: 0 ok, 1 invariant failure, 2 invalid input, 3 budget exceeded.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "rmf/rmf.hpp"

namespace {

struct CommonOpts {
    std::string format = "csv";
    std::string output;
    std::uint64_t seed = 1;
    unsigned threads = 0;  // 0 -> hardware
    std::uint64_t paths = 10'000;

    unsigned effective_threads() const {
        if (threads > 0) return threads;
        const unsigned hw = std::thread::hardware_concurrency();
        return hw ? hw : 1;
    }
    rmf::McOptions mc() const { return {paths, seed, effective_threads(), 0}; }
};

void add_output_opts(CLI::App* sub, CommonOpts& c) {
    sub->fallthrough();  // lets --config reach the top-level app from anywhere
    sub->add_option("--format", c.format, "Output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--output,-o", c.output, "Write the table to this file instead of stdout");
}

void add_run_opts(CLI::App* sub, CommonOpts& c) {
    add_output_opts(sub, c);
    sub->add_option("--seed", c.seed, "Base seed; recorded in every emitted row that used it");
    sub->add_option("--threads", c.threads, "Worker threads (default: RMF_THREADS or hardware)")
        ->envname("RMF_THREADS");
}

void emit(const rmf::Table& table, const CommonOpts& c) {
    const auto fmt = rmf::parse_format(c.format);
    if (c.output.empty()) {
        table.write(std::cout, fmt);
        return;
    }
    std::ofstream out(c.output, std::ios::binary | std::ios::trunc);
    if (!out) throw std::invalid_argument("cannot open output file " + c.output);
    table.write(out, fmt);
}

struct ModelOpts {
    std::string name = "rademacher";
    std::string support;  // "v:p,v:p" with rational v and p

    rmf::ModelSpec build() const {
        if (name == "rademacher") return rmf::ModelSpec::rademacher();
        if (name == "mobius-deterministic") return rmf::ModelSpec::mobius_deterministic();
        if (name == "symmetric") {
            if (support.empty())
                throw std::invalid_argument("--model symmetric requires --support v:p,v:p,...");
            std::vector<rmf::SupportAtom> atoms;
            std::stringstream ss(support);
            std::string item;
            while (std::getline(ss, item, ',')) {
                const auto colon = item.find(':');
                if (colon == std::string::npos)
                    throw std::invalid_argument("bad support atom '" + item + "' (want value:prob)");
                atoms.push_back({rmf::Rational(item.substr(0, colon)), rmf::Rational(item.substr(colon + 1))});
            }
            return rmf::ModelSpec::symmetric_finite(std::move(atoms));
        }
        throw std::invalid_argument("unknown model '" + name +
                                    "' (rademacher | mobius-deterministic | symmetric)");
    }
};

void add_model_opts(CLI::App* sub, ModelOpts& m) {
    sub->add_option("--model", m.name, "rademacher | mobius-deterministic | symmetric");
    sub->add_option("--support", m.support,
                    "Support atoms for --model symmetric, e.g. 1:1/4,-1:1/4,1/2:1/4,-1/2:1/4");
}

struct BoundOpts {
    rmf::BoundParams params;
    double delta_const = std::numeric_limits<double>::quiet_NaN();

    rmf::BoundParams build() const {
        rmf::BoundParams p = params;
        if (!std::isnan(delta_const)) {
            const double d = delta_const;
            p.delta_rule = [d](std::uint64_t) { return d; };
        }
        return p;
    }
};

void add_bound_opts(CLI::App* sub, BoundOpts& b) {
    sub->add_option("--c", b.params.c, "omega(l) <= c ln l / lnln l constant");
    sub->add_option("--c0", b.params.c0, "tail scale constant c0");
    sub->add_option("--C", b.params.C, "generic constant C");
    sub->add_option("--C1", b.params.C1, "lower sandwich / supnorm constant C1");
    sub->add_option("--C2", b.params.C2, "upper sandwich constant C2");
    sub->add_option("--c1", b.params.c1, "k-range constant c1");
    sub->add_option("--kappa", b.params.kappa, "O(k^2) constant in the C_k rule");
    sub->add_option("--kappa2", b.params.kappa2, "numerator of the default delta(n) = kappa2/lnln n");
    sub->add_option("--delta-const", b.delta_const, "freeze every o(1) exponent at this value");
}

std::uint64_t require_tables_span(const std::vector<std::uint64_t>& ns) {
    std::uint64_t m = 2;
    for (auto n : ns) m = std::max(m, n);
    if (m > 100'000'000) throw std::invalid_argument("n above the configured sieve ceiling 1e8");
    return m;
}

// ---------------------------------------------------------------------------
// subcommand bodies
// ---------------------------------------------------------------------------

int run_sieve(std::uint64_t n_max, const std::string& cache, bool rebuild, const CommonOpts& c) {
    rmf::SieveTables t;
    std::string source = "built";
    if (!cache.empty() && !rebuild && std::filesystem::exists(cache)) {
        t = rmf::load_tables(cache);
        source = "cache";
        if (t.n_max < n_max) {
            t = rmf::build_tables(n_max);
            source = "rebuilt";
        }
    } else {
        t = rmf::build_tables(n_max);
    }
    if (!cache.empty() && source != "cache") rmf::save_tables(t, cache);
    const std::uint64_t q = rmf::squarefree_count(t, t.n_max);
    rmf::Table table({"n_max", "primes", "squarefree", "density", "six_over_pi_sq", "largest_prime",
                      "source"});
    table.row()
        .num(t.n_max)
        .num(static_cast<std::uint64_t>(t.primes.size()))
        .num(q)
        .num(static_cast<double>(q) / static_cast<double>(t.n_max))
        .num(6.0 / (std::numbers::pi * std::numbers::pi))
        .num(static_cast<std::uint64_t>(t.primes.back()))
        .text(source);
    emit(table, c);
    return 0;
}

int run_dickman(const std::vector<double>& us, double step, const CommonOpts& c) {
    double u_max = 2.0;
    for (double u : us) {
        if (u < 0) throw std::invalid_argument("dickman: u must be >= 0");
        u_max = std::max(u_max, u);
    }
    const rmf::DickmanTable rho(u_max + 1.0, step);
    rmf::Table table({"u", "rho", "step", "method"});
    for (double u : us) table.row().num(u).num(rho(u)).num(step).text("volterra-trapezoid");
    emit(table, c);
    return 0;
}

int run_simulate(const ModelOpts& m, std::vector<std::uint64_t> n_grid, std::int64_t dump_path,
                 const CommonOpts& c) {
    const auto spec = m.build();
    std::sort(n_grid.begin(), n_grid.end());
    const auto t = rmf::build_tables(require_tables_span(n_grid));
    if (dump_path >= 0) {
        const auto path = rmf::sample_path(spec, t, c.seed, static_cast<std::uint64_t>(dump_path));
        rmf::Table table({"prime", "value"});
        for (std::size_t i = 0; i < t.primes.size(); ++i)
            table.row().num(static_cast<std::uint64_t>(t.primes[i])).num(path.values[i]);
        emit(table, c);
        return 0;
    }
    const auto sums = rmf::mc_sample_sums(spec, t, n_grid, c.mc());
    rmf::Table table({"path_id", "n", "s_n", "model", "seed"});
    for (std::uint64_t pid = 0; pid < c.paths; ++pid)
        for (std::size_t g = 0; g < n_grid.size(); ++g)
            table.row().num(pid).num(n_grid[g]).num(sums[g][pid]).text(m.name).num(c.seed);
    emit(table, c);
    return 0;
}

int run_decompose(const ModelOpts& m, std::uint64_t n, std::uint64_t path_id, const CommonOpts& c) {
    const auto spec = m.build();
    const auto t = rmf::build_tables(std::max<std::uint64_t>(n, 2));
    const auto path = rmf::sample_path(spec, t, c.seed, path_id);
    const auto d = rmf::martingale_decomposition(path, t, n);
    std::vector<std::uint64_t> differ;
    for (const auto& [p, v] : d.cells)
        if (rmf::in_delta(n, p) != rmf::in_delta_alternate(n, p)) differ.push_back(p);
    if (!differ.empty()) {
        std::cerr << "note: delta readings (ln(n/p))^3 vs 3 ln(n/p) differ at primes:";
        for (auto p : differ) std::cerr << ' ' << p;
        std::cerr << '\n';
    }
    rmf::Table table({"cell", "m_p", "in_delta", "in_delta_alt", "n", "path_id", "seed"});
    table.row().text("theta_1").num(d.theta_1_cell).text("-").text("-").num(n).num(path_id).num(c.seed);
    for (const auto& [p, v] : d.cells)
        table.row()
            .text(std::to_string(p))
            .num(v)
            .text(rmf::in_delta(n, p) ? "true" : "false")
            .text(rmf::in_delta_alternate(n, p) ? "true" : "false")
            .num(n)
            .num(path_id)
            .num(c.seed);
    emit(table, c);
    return 0;
}

int run_badsets(std::uint64_t n, const std::string& method, unsigned weight_cap, const CommonOpts& c) {
    const auto t = rmf::build_tables(std::max<std::uint64_t>(n, 2));
    const auto m = rmf::build_exponent_matrix(t, n);
    std::vector<rmf::WeightDistribution> dists;
    if (method == "kernel") {
        dists.push_back(rmf::badset_counts_kernel(m, weight_cap, 28, c.effective_threads()));
    } else if (method == "macwilliams") {
        dists.push_back(rmf::badset_counts_macwilliams(m, 26, c.effective_threads()));
    } else if (method == "brute") {
        dists.push_back(rmf::brute_force_badsets(t, n, weight_cap));
    } else if (method == "cross-check") {
        dists.push_back(rmf::badset_counts_kernel(m, 0, 28, c.effective_threads()));
        dists.push_back(rmf::badset_counts_macwilliams(m, 26, c.effective_threads()));
        if (m.cols() <= 20) dists.push_back(rmf::brute_force_badsets(t, n));
    } else {
        throw std::invalid_argument("badsets: unknown method '" + method + "'");
    }
    bool agree = true;
    for (const auto& d : dists)
        if (d.counts != dists.front().counts) agree = false;
    rmf::Table table({"n", "size", "count", "method", "rank", "nullity", "agree"});
    for (const auto& d : dists)
        for (const auto& [w, cnt] : d.counts)
            table.row()
                .num(n)
                .num(static_cast<std::uint64_t>(w))
                .num(cnt)
                .text(rmf::to_string(d.method))
                .num(static_cast<std::uint64_t>(d.rank))
                .num(static_cast<std::uint64_t>(d.nullity))
                .text(agree ? "true" : "false");
    emit(table, c);
    return agree ? 0 : 1;
}

int run_moments(const ModelOpts& m, std::vector<std::uint64_t> n_grid, std::vector<unsigned> r_list,
                const std::string& method, bool diagnostics, const CommonOpts& c) {
    const auto spec = m.build();
    std::sort(n_grid.begin(), n_grid.end());
    const auto t = rmf::build_tables(require_tables_span(n_grid));
    rmf::Table table({"n", "parameter", "value", "se", "method", "paths", "seed"});
    if (diagnostics) {
        const auto sums = rmf::mc_sample_sums(spec, t, n_grid, c.mc());
        for (std::size_t g = 0; g < n_grid.size(); ++g) {
            const double q_n =
                rmf::second_moment_formula(spec, t, n_grid[g]).convert_to<double>();
            const auto rep = rmf::normality_diagnostics(sums[g], n_grid[g], q_n);
            const auto ratio = rmf::raw_kurtosis_ratio(sums[g]);
            auto add = [&](const std::string& what, double v, double se) {
                table.row().num(n_grid[g]).text(what).num(v).num(se).text("monte-carlo").num(c.paths).num(c.seed);
            };
            add("excess-kurtosis", rep.excess_kurtosis, rep.kurtosis_se);
            add("kurtosis-ratio", ratio.value, ratio.se);
            add("ks-distance", rep.ks_distance, 0.0);
        }
        emit(table, c);
        return 0;
    }
    if (method == "mc" || method == "both") {
        for (const auto& rep : rmf::mc_moments(spec, t, n_grid, r_list, c.mc()))
            table.row()
                .num(rep.n)
                .text(rep.parameter)
                .num(rep.value)
                .num(rep.standard_error)
                .text(rmf::to_string(rep.method))
                .num(rep.paths)
                .num(rep.seed);
    }
    if (method == "exact" || method == "both") {
        if (spec.family != rmf::Family::rademacher)
            throw std::invalid_argument("moments: exact enumeration supports the Rademacher model only");
        for (auto n : n_grid)
            for (unsigned r : r_list) {
                const rmf::BigInt v = rmf::exact_moment_enumeration(t, n, r);
                table.row()
                    .num(n)
                    .text("2r=" + std::to_string(2 * r))
                    .num(v)
                    .num(0.0)
                    .text("enumeration")
                    .num(std::uint64_t{0})
                    .num(c.seed);
            }
    }
    emit(table, c);
    return 0;
}

int run_tails(const ModelOpts& m, std::uint64_t n, const std::vector<double>& t0s, const CommonOpts& c) {
    const auto spec = m.build();
    const auto t = rmf::build_tables(std::max<std::uint64_t>(n, 2));
    rmf::Table table({"n", "parameter", "value", "se", "method", "paths", "seed", "wilson_lo",
                      "wilson_hi"});
    for (const auto& rep : rmf::mc_tail(spec, t, n, t0s, c.mc()))
        table.row()
            .num(rep.n)
            .text("t0=" + rmf::format_double(rep.t0))
            .num(rep.p_hat)
            .num(rep.standard_error)
            .text("monte-carlo")
            .num(rep.paths)
            .num(rep.seed)
            .num(rep.wilson_lo)
            .num(rep.wilson_hi);
    emit(table, c);
    return 0;
}

int run_charfn(const ModelOpts& m, std::vector<std::uint64_t> n_grid, double t_val,
               const std::string& a_rule, std::uint64_t exact_max, const CommonOpts& c) {
    const auto spec = m.build();
    std::sort(n_grid.begin(), n_grid.end());
    const auto t = rmf::build_tables(require_tables_span(n_grid));
    const rmf::NormalizationRule rule{a_rule, {}};
    rmf::Table table({"n", "parameter", "value", "se", "method", "paths", "seed", "a_n"});
    for (const auto& rep : rmf::mc_charfn_decay(spec, t, n_grid, t_val, rule, c.mc()))
        table.row()
            .num(rep.n)
            .text("t=" + rmf::format_double(rep.t))
            .num(rep.estimate)
            .num(rep.standard_error)
            .text("monte-carlo")
            .num(rep.paths)
            .num(rep.seed)
            .num(rep.a_n);
    if (exact_max > 0) {
        if (spec.family != rmf::Family::rademacher)
            throw std::invalid_argument("charfn: exact enumeration supports the Rademacher model only");
        for (auto n : n_grid) {
            if (n > exact_max || t.prime_count_upto(n) > 25) continue;
            const double a = rule(n);
            const auto cf = rmf::exact_charfn(t, n, t_val / a);
            table.row()
                .num(n)
                .text("t=" + rmf::format_double(t_val))
                .num(cf.cos_mean)
                .num(0.0)
                .text("enumeration")
                .num(std::uint64_t{0})
                .num(c.seed)
                .num(a);
        }
    }
    emit(table, c);
    return 0;
}

int run_growth(const ModelOpts& m, std::uint64_t n_max, double epsilon, const CommonOpts& c) {
    const auto spec = m.build();
    const auto t = rmf::build_tables(std::max<std::uint64_t>(n_max, 2));
    const auto rep = rmf::path_growth_report(spec, t, n_max, epsilon, c.mc());
    rmf::Table table({"n", "parameter", "value", "se", "method", "paths", "seed", "epsilon"});
    for (const auto& [q, v] : rep.quantiles)
        table.row()
            .num(n_max)
            .text("q=" + rmf::format_double(q))
            .num(v)
            .text("-")
            .text("monte-carlo")
            .num(rep.paths)
            .num(rep.seed)
            .num(epsilon);
    emit(table, c);
    return 0;
}

int run_bounds(const std::string& which, const BoundOpts& bo, std::vector<std::uint64_t> n_grid,
               unsigned k, double q, double t0, double m_big, double a, double b,
               std::vector<double> beta_grid, double quad_step, std::uint64_t p_prime, double t_val,
               const std::string& a_rule, bool compare, const CommonOpts& c) {
    const rmf::BoundParams params = bo.build();
    rmf::Table table({"which", "inputs", "value", "comparison", "ratio", "flags"});
    auto row = [&](const std::string& inputs, double value, std::optional<double> cmp,
                   const std::string& flags) {
        auto rb = table.row();
        rb.text(which).text(inputs).num(value);
        if (cmp) {
            rb.num(*cmp);
            rb.num(*cmp != 0.0 ? value / *cmp : std::numeric_limits<double>::infinity());
        } else {
            rb.text("-").text("-");
        }
        rb.text(flags);
    };
    const std::uint64_t span = require_tables_span(n_grid);
    std::optional<rmf::SieveTables> tables;
    auto t = [&]() -> const rmf::SieveTables& {
        if (!tables) tables = rmf::build_tables(std::max<std::uint64_t>(span, 2));
        return *tables;
    };

    if (which == "theta-sup") {
        for (auto n : n_grid) row("n=" + std::to_string(n) + ",M=" + rmf::format_double(m_big),
                                  rmf::theta_sup_scale(m_big, n, params), std::nullopt, "");
    } else if (which == "variance-sandwich") {
        for (auto n : n_grid) {
            const auto [lo, hi] = rmf::variance_sandwich(a, b, n, params);
            std::optional<double> cmp;
            std::string flags;
            if (compare) {
                const double q_n = static_cast<double>(rmf::squarefree_count(t(), n));
                cmp = q_n;
                flags = (lo <= q_n && q_n <= hi) ? "inside" : "OUTSIDE";
            }
            row("n=" + std::to_string(n) + ",lower", lo, cmp, flags);
            row("n=" + std::to_string(n) + ",upper", hi, cmp, flags);
        }
    } else if (which == "even-moment" || which == "even-moment-alt") {
        for (auto n : n_grid) {
            const double v = which == "even-moment" ? rmf::even_moment_bound(params, n, k, m_big)
                                                    : rmf::even_moment_bound_alt(params, n, k, m_big);
            std::optional<double> cmp;
            if (compare && t().prime_count_upto(n) <= 25)
                cmp = rmf::exact_moment_enumeration(t(), n, k).convert_to<double>();
            row("n=" + std::to_string(n) + ",k=" + std::to_string(k), v, cmp, "");
        }
    } else if (which == "lq-norm") {
        for (auto n : n_grid) {
            std::optional<double> cmp;
            if (compare && q == 2.0)
                cmp = std::sqrt(static_cast<double>(rmf::squarefree_count(t(), n)));
            row("n=" + std::to_string(n) + ",q=" + rmf::format_double(q),
                rmf::lq_norm_bound(params, n, q, m_big), cmp, "");
        }
    } else if (which == "tail") {
        for (auto n : n_grid) {
            const auto tb = rmf::subgaussian_tail_bound(params, n, t0, m_big);
            row("n=" + std::to_string(n) + ",t0=" + rmf::format_double(t0) +
                    ",u_n=" + rmf::format_double(tb.u_n),
                tb.bound, std::nullopt, "");
        }
    } else if (which == "badset-moment" || which == "badset-harper") {
        for (auto n : n_grid) {
            double v;
            std::string flags;
            if (which == "badset-moment") {
                v = rmf::badset_moment_bound(params, n, k);
            } else {
                const auto fv = rmf::badset_harper_bound(params, n, k);
                v = fv.value;
                flags = fv.in_hypothesis ? "in-hypothesis" : "out-of-hypothesis";
            }
            std::optional<double> cmp;
            if (compare) {
                const auto m = rmf::build_exponent_matrix(t(), n);
                const auto d = rmf::badset_counts_macwilliams(m, 26, c.effective_threads());
                cmp = d.badset_count(2 * k).convert_to<double>();
            }
            row("n=" + std::to_string(n) + ",k=" + std::to_string(k), v, cmp, flags);
        }
    } else if (which == "hypercontractive") {
        for (auto n : n_grid) {
            std::optional<double> cmp;
            if (compare) cmp = rmf::lq_norm_bound(params, n, 2.0 * q, m_big);
            row("n=" + std::to_string(n) + ",q=" + rmf::format_double(q),
                rmf::hypercontractive_bound(t(), n, q), cmp, compare ? "comparison=lq-norm(2q)" : "");
        }
    } else if (which == "charfn-tail-sum") {
        for (auto n : n_grid) {
            const auto m = rmf::build_exponent_matrix(t(), n);
            const auto d = rmf::badset_counts_macwilliams(m, 26, c.effective_threads());
            const double a_n = rmf::NormalizationRule{a_rule, {}}(n);
            row("n=" + std::to_string(n) + ",t=" + rmf::format_double(t_val) +
                    ",a_n=" + rmf::format_double(a_n),
                rmf::charfn_tail_sum(t(), d, n, t_val, a_n, m_big, params), std::nullopt, "");
        }
    } else if (which == "integral") {
        for (double beta : beta_grid) {
            const auto iv = rmf::supnorm_integral(beta, quad_step);
            row("beta=" + rmf::format_double(beta), iv.value, std::optional<double>(std::log(beta)),
                "ratio=I/ln(beta)");
        }
    } else if (which == "mp-supnorm") {
        for (auto n : n_grid) {
            const auto fv = rmf::martingale_supnorm_bound(params, n, p_prime, m_big);
            std::optional<double> cmp;
            if (compare) cmp = rmf::sup_norm_Mp(rmf::ModelSpec::rademacher(), t(), n, p_prime);
            row("n=" + std::to_string(n) + ",p=" + std::to_string(p_prime), fv.value, cmp,
                fv.in_hypothesis ? "in-hypothesis" : "out-of-hypothesis");
        }
    } else {
        throw std::invalid_argument(
            "bounds: unknown evaluator '" + which +
            "' (theta-sup | variance-sandwich | even-moment | even-moment-alt | lq-norm | tail | "
            "badset-moment | badset-harper | hypercontractive | charfn-tail-sum | integral | "
            "mp-supnorm)");
    }
    emit(table, c);
    return 0;
}

int run_verify_cmd(const std::string& level, const CommonOpts& c) {
    const auto res = rmf::run_verify(level, c.seed, c.effective_threads());
    emit(res.table, c);
    return res.all_passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rmflab: exact and Monte Carlo laboratory for Rademacher random multiplicative functions"};
    app.require_subcommand(1);
    app.set_config("--config", "",
                   "Key = value config file; section [subcommand] holds that subcommand's options");

    CommonOpts common;
    std::function<int()> action;

    // sieve
    {
        auto* sub = app.add_subcommand("sieve", "Build (or load) factorization tables");
        auto n_max = std::make_shared<std::uint64_t>(1'000'000);
        auto cache = std::make_shared<std::string>();
        auto rebuild = std::make_shared<bool>(false);
        sub->add_option("--n-max", *n_max, "Table size")->required();
        sub->add_option("--cache", *cache, "Binary cache file to load from / save to");
        sub->add_flag("--rebuild", *rebuild, "Ignore an existing cache and rebuild");
        add_output_opts(sub, common);
        sub->callback([&, n_max, cache, rebuild] {
            action = [&, n_max, cache, rebuild] { return run_sieve(*n_max, *cache, *rebuild, common); };
        });
    }
    // dickman
    {
        auto* sub = app.add_subcommand("dickman", "Evaluate the Dickman rho function");
        auto us = std::make_shared<std::vector<double>>(std::vector<double>{0.5, 1.0, 1.5, 2.0, 3.0});
        auto step = std::make_shared<double>(1e-4);
        sub->add_option("--u", *us, "Evaluation points")->delimiter(',');
        sub->add_option("--step", *step, "Integrator step");
        add_output_opts(sub, common);
        sub->callback([&, us, step] {
            action = [&, us, step] { return run_dickman(*us, *step, common); };
        });
    }
    // simulate
    {
        auto* sub = app.add_subcommand("simulate", "Sample paths and report S_n");
        auto model = std::make_shared<ModelOpts>();
        auto n_grid = std::make_shared<std::vector<std::uint64_t>>(std::vector<std::uint64_t>{100});
        auto dump = std::make_shared<std::int64_t>(-1);
        sub->add_option("--n", *n_grid, "Evaluation points n (repeatable)")->delimiter(',');
        sub->add_option("--dump-path", *dump, "Emit the (prime, value) rows of this path id instead");
        add_model_opts(sub, *model);
        add_run_opts(sub, common);
        sub->add_option("--paths", common.paths, "Number of sampled paths");
        sub->callback([&, model, n_grid, dump] {
            action = [&, model, n_grid, dump] { return run_simulate(*model, *n_grid, *dump, common); };
        });
    }
    // decompose
    {
        auto* sub = app.add_subcommand("decompose", "Martingale decomposition of one path");
        auto model = std::make_shared<ModelOpts>();
        auto n = std::make_shared<std::uint64_t>(100);
        auto path_id = std::make_shared<std::uint64_t>(0);
        sub->add_option("--n", *n, "Decompose S_n")->required();
        sub->add_option("--path-id", *path_id, "Path id");
        add_model_opts(sub, *model);
        add_run_opts(sub, common);
        sub->callback([&, model, n, path_id] {
            action = [&, model, n, path_id] { return run_decompose(*model, *n, *path_id, common); };
        });
    }
    // badsets
    {
        auto* sub = app.add_subcommand("badsets", "Count square-product subsets by size");
        auto n = std::make_shared<std::uint64_t>(10);
        auto method = std::make_shared<std::string>("kernel");
        auto cap = std::make_shared<unsigned>(0);
        sub->add_option("--n", *n, "Upper end of [1, n]")->required();
        sub->add_option("--method", *method, "kernel | macwilliams | brute | cross-check");
        sub->add_option("--weight-cap", *cap, "Truncate the histogram at this subset size (0 = all)");
        add_run_opts(sub, common);
        sub->callback([&, n, method, cap] {
            action = [&, n, method, cap] { return run_badsets(*n, *method, *cap, common); };
        });
    }
    // moments
    {
        auto* sub = app.add_subcommand("moments", "Even moments E[S_n^{2r}], exact and Monte Carlo");
        auto model = std::make_shared<ModelOpts>();
        auto n_grid = std::make_shared<std::vector<std::uint64_t>>(std::vector<std::uint64_t>{30});
        auto r_list = std::make_shared<std::vector<unsigned>>(std::vector<unsigned>{1, 2});
        auto method = std::make_shared<std::string>("mc");
        auto diagnostics = std::make_shared<bool>(false);
        sub->add_option("--n", *n_grid, "Evaluation points")->delimiter(',');
        sub->add_option("--r", *r_list, "Half-orders r (moment order 2r)")->delimiter(',');
        sub->add_option("--method", *method, "mc | exact | both");
        sub->add_flag("--diagnostics", *diagnostics,
                      "Emit kurtosis and KS normality diagnostics instead of raw moments");
        add_model_opts(sub, *model);
        add_run_opts(sub, common);
        sub->add_option("--paths", common.paths, "Monte Carlo paths");
        sub->callback([&, model, n_grid, r_list, method, diagnostics] {
            action = [&, model, n_grid, r_list, method, diagnostics] {
                return run_moments(*model, *n_grid, *r_list, *method, *diagnostics, common);
            };
        });
    }
    // tails
    {
        auto* sub = app.add_subcommand("tails", "Empirical tail probabilities P(S_n >= t0)");
        auto model = std::make_shared<ModelOpts>();
        auto n = std::make_shared<std::uint64_t>(1000);
        auto t0s = std::make_shared<std::vector<double>>(std::vector<double>{0.0});
        sub->add_option("--n", *n, "Sum length")->required();
        sub->add_option("--t0", *t0s, "Thresholds")->delimiter(',');
        add_model_opts(sub, *model);
        add_run_opts(sub, common);
        sub->add_option("--paths", common.paths, "Monte Carlo paths");
        sub->callback([&, model, n, t0s] {
            action = [&, model, n, t0s] { return run_tails(*model, *n, *t0s, common); };
        });
    }
    // charfn
    {
        auto* sub = app.add_subcommand("charfn", "E[cos(t S_n / a_n)] across an n-grid");
        auto model = std::make_shared<ModelOpts>();
        auto n_grid = std::make_shared<std::vector<std::uint64_t>>(
            std::vector<std::uint64_t>{100, 1000, 10'000});
        auto t_val = std::make_shared<double>(1.0);
        auto a_rule = std::make_shared<std::string>("sqrt-n");
        auto exact_max = std::make_shared<std::uint64_t>(0);
        sub->add_option("--n", *n_grid, "Evaluation points")->delimiter(',');
        sub->add_option("--t", *t_val, "Argument t");
        sub->add_option("--a-rule", *a_rule, "sqrt-n | sqrt-n-over-log-n | b-n");
        sub->add_option("--exact-max", *exact_max,
                        "Also emit exact enumeration rows for n up to this value");
        add_model_opts(sub, *model);
        add_run_opts(sub, common);
        sub->add_option("--paths", common.paths, "Monte Carlo paths");
        sub->callback([&, model, n_grid, t_val, a_rule, exact_max] {
            action = [&, model, n_grid, t_val, a_rule, exact_max] {
                return run_charfn(*model, *n_grid, *t_val, *a_rule, *exact_max, common);
            };
        });
    }
    // growth
    {
        auto* sub = app.add_subcommand("growth", "Quantiles of sup_n n^{-1/2-eps} |S_n|");
        auto model = std::make_shared<ModelOpts>();
        auto n_max = std::make_shared<std::uint64_t>(10'000);
        auto eps = std::make_shared<double>(0.1);
        sub->add_option("--n-max", *n_max, "Top of the geometric n-grid");
        sub->add_option("--epsilon", *eps, "Exponent margin (> 0)");
        add_model_opts(sub, *model);
        add_run_opts(sub, common);
        sub->add_option("--paths", common.paths, "Monte Carlo paths");
        sub->callback([&, model, n_max, eps] {
            action = [&, model, n_max, eps] { return run_growth(*model, *n_max, *eps, common); };
        });
    }
    // bounds
    {
        auto* sub = app.add_subcommand("bounds", "Evaluate an analytic bound on a grid");
        auto which = std::make_shared<std::string>();
        auto bo = std::make_shared<BoundOpts>();
        auto n_grid = std::make_shared<std::vector<std::uint64_t>>(std::vector<std::uint64_t>{1000});
        auto k = std::make_shared<unsigned>(2);
        auto q = std::make_shared<double>(2.0);
        auto t0 = std::make_shared<double>(1.0);
        auto m_big = std::make_shared<double>(1.0);
        auto a = std::make_shared<double>(1.0);
        auto b = std::make_shared<double>(1.0);
        auto beta_grid = std::make_shared<std::vector<double>>(
            std::vector<double>{2, 10, 100, 10'000, 1'000'000});
        auto quad_step = std::make_shared<double>(1e-3);
        auto p_prime = std::make_shared<std::uint64_t>(5);
        auto t_val = std::make_shared<double>(0.5);
        auto a_rule = std::make_shared<std::string>("sqrt-n");
        auto compare = std::make_shared<bool>(false);
        sub->add_option("--which", *which, "Evaluator name")->required();
        sub->add_option("--n", *n_grid, "n grid")->delimiter(',');
        sub->add_option("--k", *k, "Moment half-order k");
        sub->add_option("--q", *q, "Norm order q");
        sub->add_option("--t0", *t0, "Tail threshold");
        sub->add_option("--M", *m_big, "Model sup norm M");
        sub->add_option("--a", *a, "Second-moment lower bound a");
        sub->add_option("--b", *b, "Second-moment upper bound b");
        sub->add_option("--beta", *beta_grid, "beta grid for the integral")->delimiter(',');
        sub->add_option("--quad-step", *quad_step, "Quadrature step");
        sub->add_option("--p", *p_prime, "Prime p for mp-supnorm");
        sub->add_option("--t", *t_val, "Argument t for charfn-tail-sum");
        sub->add_option("--a-rule", *a_rule, "Normalization for charfn-tail-sum");
        sub->add_flag("--compare", *compare, "Also emit the exact comparison value where available");
        add_bound_opts(sub, *bo);
        add_run_opts(sub, common);
        sub->callback([&, which, bo, n_grid, k, q, t0, m_big, a, b, beta_grid, quad_step, p_prime,
                       t_val, a_rule, compare] {
            action = [&, which, bo, n_grid, k, q, t0, m_big, a, b, beta_grid, quad_step, p_prime,
                      t_val, a_rule, compare] {
                return run_bounds(*which, *bo, *n_grid, *k, *q, *t0, *m_big, *a, *b, *beta_grid,
                                  *quad_step, *p_prime, *t_val, *a_rule, *compare, common);
            };
        });
    }
    // verify
    {
        auto* sub = app.add_subcommand("verify", "Run the cross-module invariant suite");
        auto level = std::make_shared<std::string>("quick");
        sub->add_option("--level", *level, "quick | full")->check(CLI::IsMember({"quick", "full"}));
        add_run_opts(sub, common);
        sub->callback([&, level] {
            action = [&, level] { return run_verify_cmd(*level, common); };
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        return action ? action() : 2;
    } catch (const rmf::BudgetExceeded& e) {
        std::cerr << "budget exceeded: " << e.what() << '\n';
        return 3;
    } catch (const rmf::InternalFault& e) {
        std::cerr << "internal consistency fault: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
