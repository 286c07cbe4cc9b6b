// Acceptance checks, one line per criterion. Criteria 9-13 need the real data files in
// $STL_DATA_DIR and report SKIP otherwise.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "helpers.hpp"
#include "study_fixture.hpp"
#include "styletiming/attribution.hpp"
#include "styletiming/benchmarks.hpp"
#include "styletiming/errors.hpp"
#include "styletiming/run.hpp"
#include "styletiming/stats.hpp"

using namespace stltest;
namespace fs = std::filesystem;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
    Status status;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double e = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, e);
    return buf;
}

Outcome verdict(bool ok, std::string detail) { return {ok ? Status::pass : Status::fail, std::move(detail)}; }

// ---- 1: math kernels
Outcome kernels() {
    bool ok = std::fabs(softplus(0.0) - std::log(2.0)) <= 1e-12;
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd(0.0, 5.0);
    std::uniform_real_distribution<double> ud(0.01, 0.5);
    for (int i = 0; i < 100000; ++i) {
        const double tilt = ud(rng);
        const double w = target_weight(nd(rng), tilt, 0.75);
        if (w < 0.5 - tilt || w > 0.5 + tilt) ok = false;
        const double r = nd(rng);
        DirectionalSignals s{{r}, {0.0}, {0.0}, {0.0}, {0.0}};
        const double q = smooth_components(s).rate_quiet[0];
        if (!(q > 0.0 && q <= 1.0) && std::fabs(r) < 30.0) ok = false;
    }
    for (double eta : {0.03, 0.05, 0.1, 1.0}) {
        const double c = 0.73;
        const double w0 = 0.25;
        const std::vector<double> t(300, c);
        const auto w = ewma_weights(t, eta, w0);
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double bound = std::pow(1.0 - eta, static_cast<double>(i + 1)) * std::fabs(w0 - c) + 1e-12;
            if (std::fabs(w[i] - c) >= bound + 1e-15) ok = false;
        }
    }
    return verdict(ok, "softplus(0)=ln2, tanh band on 1e5 draws, RateQuiet in (0,1], EWMA contraction");
}

// ---- 2: OLS / HAC oracle
std::vector<double> gauss_solve(std::vector<std::vector<double>> a) {
    const std::size_t k = a.size();
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < k; ++r)
            if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
        std::swap(a[c], a[piv]);
        for (std::size_t r = 0; r < k; ++r) {
            if (r == c) continue;
            const double f = a[r][c] / a[c][c];
            for (std::size_t j = c; j <= k; ++j) a[r][j] -= f * a[c][j];
        }
    }
    std::vector<double> b(k);
    for (std::size_t i = 0; i < k; ++i) b[i] = a[i][k] / a[i][i];
    return b;
}

Outcome ols_oracle() {
    double worst_coef = 0.0;
    double worst_se = 0.0;
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> nk(2, 7);
    std::uniform_int_distribution<int> nn(40, 500);
    std::normal_distribution<double> nd;
    for (int p = 0; p < 200; ++p) {
        const int k = nk(rng);
        const int n = nn(rng);
        Eigen::MatrixXd x(n, k);
        Eigen::VectorXd y(n);
        for (int r = 0; r < n; ++r) {
            double yy = 0.3 * nd(rng);
            for (int c = 0; c < k; ++c) {
                x(r, c) = c == 0 ? 1.0 : nd(rng);
                yy += x(r, c) * (0.1 * c - 0.2);
            }
            y(r) = yy;
        }
        std::vector<std::vector<double>> a(static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(k) + 1, 0.0));
        for (int r = 0; r < n; ++r)
            for (int i = 0; i < k; ++i) {
                for (int j = 0; j < k; ++j) a[i][j] += x(r, i) * x(r, j);
                a[i][k] += x(r, i) * y(r);
            }
        const auto oracle = gauss_solve(a);
        const auto fit = fit_ols_hac(x, y, 0);
        for (int i = 0; i < k; ++i) worst_coef = std::max(worst_coef, std::fabs(fit.coef(i) - oracle[i]));
        // White HC0 by explicit sums
        Eigen::VectorXd e = y - x * Eigen::Map<const Eigen::VectorXd>(oracle.data(), k);
        Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
        for (int r = 0; r < n; ++r) meat += e(r) * e(r) * x.row(r).transpose() * x.row(r);
        const Eigen::MatrixXd bread = (x.transpose() * x).inverse();
        const Eigen::MatrixXd white = bread * meat * bread;
        for (int i = 0; i < k; ++i)
            worst_se = std::max(worst_se, std::fabs(std::sqrt(fit.cov(i, i)) - std::sqrt(white(i, i))));
    }
    return verdict(worst_coef <= 1e-10 && worst_se <= 1e-10,
                   fmt("200 problems: max |coef diff| %.2e, max |NW(0) - White SE| %.2e", worst_coef, worst_se));
}

// ---- 3: no lookahead
GridSpec small_pool() {
    GridSpec g = local_grid();
    g.axes.alpha = {0.5, 0.67};
    g.axes.lambda_s = {0.25, 0.5};
    g.axes.lambda_c = {0.05, 0.25};
    g.axes.max_tilt = {0.3, 0.5};
    g.axes.tau_w = {0.75};
    g.axes.eta = {0.05};
    return g;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

Outcome no_lookahead() {
    int weight_breaks = 0;
    int selection_breaks = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        SynthParams p;
        p.seed = 1000 + seed;
        p.n_days = 2600;
        auto raw = synth_data(p);
        const auto base = prepare_study(raw);
        Backtester bt(base.pair, base.frame);
        const auto window = main_window();
        const auto path = bt.run(selected_config(), window);

        // perturb every day-t input: members, SPY, TNX, VIX, BAA10Y
        const std::size_t t_idx = 300 + static_cast<std::size_t>(seed * 37 % 1200);
        const Date t = path.dates[t_idx];
        auto bump = [&](DatedSeries& s, double factor) {
            const auto k = lower_index(s.dates, t);
            if (k < s.size() && s.dates[k] == t) s.values[k] *= factor;
        };
        auto pert = raw;
        for (auto& m : pert.members) bump(m, 1.03);
        bump(pert.spy, 0.97);
        bump(pert.tnx, 1.2);
        bump(pert.vix, 1.5);
        if (pert.baa10y) bump(*pert.baa10y, 1.3);
        const auto moved = prepare_study(pert);
        Backtester bt2(moved.pair, moved.frame);
        const auto path2 = bt2.run(selected_config(), window);
        for (std::size_t i = 0; i <= t_idx; ++i)
            if (!same_bits(path.weights_g[i], path2.weights_g[i])) ++weight_breaks;

        // block selections: perturb inside block k, earlier blocks and block k must not move
        WalkForwardSpec spec;
        spec.pool = small_pool();
        spec.mode = seed % 2 == 0 ? WalkForwardMode::expanding : WalkForwardMode::rolling;
        const auto wf = walk_forward(bt, spec, SelectionScore{}, window, 10.0);
        const std::size_t k = 2 + seed % (wf.blocks.size() - 3);
        const Date block_start = wf.blocks[k].block_start;
        auto pert2 = raw;
        for (auto& m : pert2.members) {
            for (std::size_t i = lower_index(m.dates, block_start); i < m.size(); ++i)
                m.values[i] *= 1.0 + 0.02 * std::sin(static_cast<double>(i));
        }
        const auto moved2 = prepare_study(pert2);
        Backtester bt3(moved2.pair, moved2.frame);
        const auto wf2 = walk_forward(bt3, spec, SelectionScore{}, window, 10.0);
        for (std::size_t b = 0; b <= k; ++b)
            if (wf.blocks[b].config_id != wf2.blocks[b].config_id) ++selection_breaks;
    }
    return verdict(weight_breaks == 0 && selection_breaks == 0,
                   fmt("50 histories: %g applied-weight changes on days <= t, %g block selection changes",
                       weight_breaks, selection_breaks));
}

// ---- 4 / 5 / 6 on one synthetic study
Outcome cost_identities(const StudyData& s) {
    Backtester bt(s.pair, s.frame);
    const std::vector<double> costs{0, 5, 10, 20};
    const auto rows = cost_sensitivity(bt, selected_config(), costs, main_window());
    bool ok = rows[0].result.net == rows[0].result.gross && rows[0].result.metrics.turnover_annual > 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) ok = ok && rows[i].result.metrics.cagr < rows[i - 1].result.metrics.cagr;
    const auto range = bt.range(main_window());
    for (const auto& r : static_benchmarks(s.pair, s.spy.values, range)) ok = ok && r.metrics.turnover_annual == 0.0;
    for (double w : {0.0, 0.3, 0.5, 0.87, 1.0}) {
        const auto g = std::span<const double>(s.pair.g).subspan(range.begin, range.end - range.begin);
        const auto d = std::span<const double>(s.pair.d).subspan(range.begin, range.end - range.begin);
        ok = ok && static_mix_metrics(w, g, d).turnover_annual == 0.0;
    }
    return verdict(ok, fmt("CAGR 0/5/10/20bp: %.4f%% %.4f%% %.4f%% %.4f%%", 100 * rows[0].result.metrics.cagr,
                           100 * rows[1].result.metrics.cagr, 100 * rows[2].result.metrics.cagr,
                           100 * rows[3].result.metrics.cagr));
}

Outcome boundary_policies(const StudyData& s) {
    Backtester bt(s.pair, s.frame);
    const auto range = bt.range(main_window());
    const std::size_t len = range.end - range.begin;
    const auto ones = replay_weights(s.pair, range, std::vector<double>(len, 1.0), 10.0, 1.0);
    double worst_g = 0.0;
    for (std::size_t i = 0; i < len; ++i) worst_g = std::max(worst_g, std::fabs(ones.net[i] - s.pair.g[range.begin + i]));
    PolicyConfig tiny = selected_config();
    tiny.max_tilt = 1e-15;
    const auto r = bt.run(tiny, range);
    const auto mix = static_mix(0.5, std::span<const double>(s.pair.g).subspan(range.begin, len),
                                std::span<const double>(s.pair.d).subspan(range.begin, len));
    double worst_mix = 0.0;
    for (std::size_t i = 0; i < len; ++i) worst_mix = std::max(worst_mix, std::fabs(r.net[i] - mix[i]));
    return verdict(worst_g <= 1e-12 && worst_mix <= 1e-12,
                   fmt("max |w=1 - G| %.2e, max |tilt->0 - 50/50| %.2e", worst_g, worst_mix));
}

Outcome vol_matching(const StudyData& s) {
    Backtester bt(s.pair, s.frame);
    const auto sel = bt.run(selected_config(), main_window());
    const auto range = bt.range(main_window());
    const auto g_only = static_benchmarks(s.pair, {}, range)[1];
    const auto vm = vol_match_weight(g_only.net, sel.metrics.vol);
    const auto scaled = scale_series(g_only.net, vm.weight);
    const double got = sample_stddev(scaled) * std::sqrt(252.0);
    const double err = std::fabs(got - sel.metrics.vol);
    return verdict(err <= 1e-10, fmt("weight %.4f, |vol - target| %.2e", vm.weight, err));
}

// ---- 7: planted signal
constexpr double kPlanted = 0.0015;

Outcome planted_signal() {
    int gate_hits = 0;
    int quintile_hits = 0;
    double min_t = 1e9;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        SynthParams p;
        p.seed = 5000 + seed;
        p.n_days = 5000;
        p.staggered_listings = false;
        p.planted_rate_effect = kPlanted;
        const auto study = prepare_study(synth_data(p));
        const auto gates = gate_regressions(study.frame, study.gd_on_frame);
        for (const auto& row : gates.main_effects) {
            if (row.name != "r") continue;
            min_t = std::min(min_t, row.hac_t);
            if (row.coef > 0.0 && row.hac_t > 2.0) ++gate_hits;
        }
        const auto score = compose_score(study.frame, ScoreKind::tnx_only, ScoreParams{});
        if (quintile_diagnostic(score.score_z, study.gd_on_frame, 21).spread > 0.0) ++quintile_hits;
    }
    return verdict(gate_hits >= 95 && quintile_hits >= 95,
                   fmt("planted %.4f: gate t>2 in %g/100 (min t %.2f), Q5-Q1>0 in %g/100", kPlanted, gate_hits, min_t,
                       quintile_hits));
}

// ---- 8: determinism of the full run
std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        out[fs::relative(e.path(), root).string()] = ss.str();
    }
    return out;
}

Outcome full_run_determinism() {
    TempDir a("acc_a");
    TempDir b("acc_b");
    auto cfg = default_run_config();
    cfg.synthetic = true;
    cfg.out_dir = a.path;
    run(cfg);
    cfg.out_dir = b.path;
    run(cfg);
    const auto ta = tree(a.path);
    const bool ok = ta == tree(b.path) && ta.size() > 50;
    return verdict(ok, fmt("%g files compared", static_cast<double>(ta.size())));
}

// ---- 9-13: real data
std::optional<StudyData> real_study() {
    const char* dir = std::getenv("STL_DATA_DIR");
    if (!dir || !*dir) return std::nullopt;
    return prepare_study(load_dataset(dir, default_growth_basket(), default_defensive_basket()));
}

bool near(double got, double want, double tol) { return std::fabs(got - want) <= tol; }

Outcome gd_attribution(const StudyData& s) {
    if (!s.factors) return {Status::fail, "factor file " + std::string(kFactorFileName) + " missing"};
    DatedSeries gd{"G-D", s.gd.dates, s.gd.values};
    const auto r = ols_hac(factor_regression_spec(gd, *s.factors, true, {d("2016-12-21"), d("2026-03-31")}));
    const bool ok = near(r.beta("MKT"), 0.273, 0.01) && near(r.beta("HML"), -0.552, 0.01) &&
                    near(r.alpha_annual, 0.0195, 0.003) && near(r.adj_r2, 0.757, 0.01);
    return verdict(ok, fmt("MKT %.3f HML %.3f alpha %.2f%% adjR2 %.3f", r.beta("MKT"), r.beta("HML"),
                           100 * r.alpha_annual, r.adj_r2));
}

Outcome tilt_rows(const StudyData& s) {
    Backtester bt(s.pair, s.frame);
    const std::vector<double> tilts{0.2, 0.5};
    auto base = tilt_study_base();
    base.cost_bps = 10.0;
    const auto rows = tilt_sweep(bt, base, tilts, main_window());
    const auto& a = rows[0].metrics;
    const auto& b = rows[1].metrics;
    const bool ok = near(a.cagr, 0.1789, 0.005) && near(a.sharpe, 0.95, 0.05) && near(b.cagr, 0.1902, 0.005) &&
                    near(b.sharpe, 0.99, 0.05) && near(b.turnover_annual / 4.6587, 1.0, 0.10);
    return verdict(ok, fmt("tilt .2: %.2f%%/%.2f; tilt .5: %.2f%%/", 100 * a.cagr, a.sharpe, 100 * b.cagr) +
                           fmt("%.2f turnover %.2f%%", b.sharpe, 100 * b.turnover_annual));
}

Outcome static_rows(const StudyData& s) {
    Backtester bt(s.pair, s.frame);
    const auto rows = static_benchmarks(s.pair, {}, bt.range(main_window()));
    const auto& h = rows[0].metrics;
    const auto& g = rows[1].metrics;
    const bool ok = near(h.cagr, 0.1712, 0.002) && near(g.cagr, 0.2134, 0.002) && near(h.max_dd, -0.3359, 0.005) &&
                    near(g.max_dd, -0.3435, 0.005);
    return verdict(ok, fmt("50/50 %.2f%% (DD %.2f%%), 100%% G %.2f%% (DD %.2f%%)", 100 * h.cagr, 100 * h.max_dd,
                           100 * g.cagr, 100 * g.max_dd));
}

Outcome volmatch_post2022(const StudyData& s) {
    Backtester bt(s.pair, s.frame);
    const auto sel = bt.run(selected_config(), main_window());
    const auto g_only = static_benchmarks(s.pair, {}, bt.range(main_window()))[1];
    const double w = vol_match_weight(g_only.net, sel.metrics.vol).weight;
    const auto table = post_2022_validation(bt, local_grid(), SelectionScore{}, main_window(), d("2022-01-03"), {}, 10.0);
    const auto& wf = table.rows[0].metrics;
    const bool ok = near(w, 0.8195, 0.005) && near(wf.cagr, 0.1530, 0.01) && near(wf.max_dd, -0.1989, 0.015);
    return verdict(ok, fmt("vol-match weight %.2f%%; post-2022 WF expanding %.2f%% (DD %.2f%%)", 100 * w, 100 * wf.cagr,
                           100 * wf.max_dd));
}

Outcome credit_overlay(const StudyData& s) {
    if (!s.frame.has_credit()) return {Status::fail, "BAA10Y.csv missing"};
    Backtester bt(s.pair, s.frame);
    auto inc = selected_config();
    inc.score.lambda_credit = 0.10;
    inc.score.lambda_rxcs = 0.50;
    const auto oc = bt.run(inc, main_window()).metrics;
    const auto local = bt.run(selected_config(), main_window()).metrics;
    const auto half = static_benchmarks(s.pair, {}, bt.range(main_window()))[0].metrics;
    const bool ok = near(oc.cagr, 0.1980, 0.01) && near(oc.sharpe, 1.04, 0.05) && oc.sharpe > local.sharpe &&
                    local.sharpe > half.sharpe;
    return verdict(ok, fmt("Old+Credit %.2f%%/%.2f; Sharpe order %.2f > %.2f > ", 100 * oc.cagr, oc.sharpe, oc.sharpe,
                           local.sharpe) +
                           fmt("%.2f", half.sharpe));
}

}  // namespace

int main() {
    int failures = 0;
    auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {Status::fail, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const char* tag = o.status == Status::pass ? "PASS" : o.status == Status::fail ? "FAIL" : "SKIP";
        if (o.status == Status::fail) ++failures;
        std::printf("[%s] %2d %s: %s (%.2f s)\n", tag, id, name, o.detail.c_str(), secs);
        std::fflush(stdout);
    };

    report(1, "math kernels", kernels);
    report(2, "OLS/HAC oracle", ols_oracle);
    report(3, "no lookahead", no_lookahead);
    const auto study = synthetic_study(7);
    report(4, "cost/turnover identities", [&] { return cost_identities(study); });
    report(5, "boundary policies", [&] { return boundary_policies(study); });
    report(6, "vol matching", [&] { return vol_matching(study); });
    report(7, "planted signal recovery", planted_signal);
    report(8, "full-run determinism", full_run_determinism);

    std::optional<StudyData> real;
    std::string real_error;
    try {
        real = real_study();
    } catch (const std::exception& e) {
        real_error = e.what();
    }
    const std::pair<const char*, Outcome (*)(const StudyData&)> reference[] = {
        {"G-D attribution", gd_attribution},
        {"tilt sweep", tilt_rows},
        {"static rows", static_rows},
        {"vol-match weight and post-2022 walk-forward", volmatch_post2022},
        {"incremental credit overlay", credit_overlay}};
    int id = 9;
    for (const auto& [name, fn] : reference) {
        if (!real) {
            report(id++, name, [&] {
                return real_error.empty() ? Outcome{Status::skip, "STL_DATA_DIR not set (real price data not bundled)"}
                                          : Outcome{Status::fail, "cannot load real data: " + real_error};
            });
            continue;
        }
        report(id++, name, [&] { return fn(*real); });
    }
    std::printf("%d failing criteria\n", failures);
    return failures == 0 ? 0 : 1;
}
