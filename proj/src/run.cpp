#include "styletiming/run.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <set>

#include "styletiming/dataset.hpp"
#include "styletiming/errors.hpp"
#include "styletiming/report.hpp"
#include "styletiming/stats.hpp"

namespace styletiming {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<NamedPeriod> default_periods() {
    return {{"COVID Rebound 2020-2021", parse_date("2020-01-01"), parse_date("2021-12-31")},
            {"Rate Hike 2022", parse_date("2022-01-01"), parse_date("2022-12-31")},
            {"AI Rally 2023-2024", parse_date("2023-01-01"), parse_date("2024-12-31")},
            {"Recent 2025-2026Q1", parse_date("2025-01-01"), parse_date("2026-03-31")}};
}

RunConfig default_run_config() {
    RunConfig c;
    c.periods = default_periods();
    return c;
}

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"attribution", "tilt",     "grid",   "benchmarks", "volmatch",
                                                "walkforward", "post2022", "credit", "diagnostics"};
    return names;
}

namespace {

std::string window_text(const DateWindow& w) { return format_date(w.start) + ":" + format_date(w.end); }

json policy_json(const PolicyConfig& c) {
    return {{"kind", to_string(c.kind)},
            {"alpha", c.score.alpha},
            {"lambda_s", c.score.lambda_s},
            {"lambda_c", c.score.lambda_c},
            {"lambda_credit", c.score.lambda_credit},
            {"lambda_rxcs", c.score.lambda_rxcs},
            {"tau_softplus", c.score.tau_softplus},
            {"max_tilt", c.max_tilt},
            {"tau_w", c.tau_w},
            {"eta", c.eta},
            {"w0", c.w0}};
}

void check_keys(const json& j, const json& reference, const std::string& where) {
    if (!j.is_object()) throw UsageError("config: '" + where + "' must be an object");
    for (const auto& [key, value] : j.items()) {
        if (!reference.contains(key)) {
            throw UsageError("config: unknown key '" + (where.empty() ? key : where + "." + key) + "'");
        }
        const auto& ref = reference.at(key);
        if (ref.is_object() && !value.is_null()) check_keys(value, ref, where.empty() ? key : where + "." + key);
    }
}

template <typename T>
T get(const json& j, const char* key, const T& fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw UsageError(std::string("config: bad value for '") + key + "': " + e.what());
    }
}

Date get_date(const json& j, const char* key, Date fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return parse_date(j.at(key).get<std::string>());
    } catch (const std::exception& e) {
        throw UsageError(std::string("config: bad date for '") + key + "': " + e.what());
    }
}

DateWindow get_window(const json& j, const char* key, DateWindow fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return parse_window(j.at(key).get<std::string>());
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception& e) {
        throw UsageError(std::string("config: bad window for '") + key + "': " + e.what());
    }
}

PolicyConfig policy_from_json(const json& j, PolicyConfig c) {
    try {
        c.kind = score_kind_from_string(get<std::string>(j, "kind", to_string(c.kind)));
    } catch (const UsageError&) {
        throw;
    }
    c.score.alpha = get(j, "alpha", c.score.alpha);
    c.score.lambda_s = get(j, "lambda_s", c.score.lambda_s);
    c.score.lambda_c = get(j, "lambda_c", c.score.lambda_c);
    c.score.lambda_credit = get(j, "lambda_credit", c.score.lambda_credit);
    c.score.lambda_rxcs = get(j, "lambda_rxcs", c.score.lambda_rxcs);
    c.score.tau_softplus = get(j, "tau_softplus", c.score.tau_softplus);
    c.max_tilt = get(j, "max_tilt", c.max_tilt);
    c.tau_w = get(j, "tau_w", c.tau_w);
    c.eta = get(j, "eta", c.eta);
    c.w0 = get(j, "w0", c.w0);
    try {
        c.validate();
    } catch (const ValidationError& e) {
        throw UsageError(std::string("config: ") + e.what());
    }
    return c;
}

}  // namespace

DateWindow parse_window(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw UsageError("window '" + text + "' must be start:end");
    try {
        DateWindow w{parse_date(text.substr(0, colon)), parse_date(text.substr(colon + 1))};
        if (w.end < w.start) throw UsageError("window '" + text + "' ends before it starts");
        return w;
    } catch (const ValidationError& e) {
        throw UsageError("window '" + text + "': " + e.what());
    }
}

json to_json(const RunConfig& c) {
    json periods = json::array();
    for (const auto& p : c.periods) {
        periods.push_back({{"name", p.name}, {"start", format_date(p.start)}, {"end", format_date(p.end)}});
    }
    return {
        {"experiment", c.experiment},
        {"data_dir", c.data_dir ? json(c.data_dir->string()) : json(nullptr)},
        {"synthetic", c.synthetic},
        {"seed", c.seed},
        {"window", window_text(c.window)},
        {"attribution_window", window_text(c.attribution_window)},
        {"post2022_start", format_date(c.post2022_start)},
        {"periods", periods},
        {"rolling_windows", c.rolling_windows},
        {"cost_bps", c.cost_bps},
        {"cost_levels", c.cost_levels},
        {"tilts", c.tilts},
        {"baskets", {{"growth", {{"name", c.growth.name}, {"members", c.growth.members}}},
                     {"defensive", {{"name", c.defensive.name}, {"members", c.defensive.members}}}}},
        {"selected", policy_json(c.selected)},
        {"tilt_base", policy_json(c.tilt_base)},
        {"grid", {{"alpha", c.grid.alpha},
                  {"lambda_s", c.grid.lambda_s},
                  {"lambda_c", c.grid.lambda_c},
                  {"lambda_credit", c.grid.lambda_credit},
                  {"lambda_rxcs", c.grid.lambda_rxcs},
                  {"max_tilt", c.grid.max_tilt},
                  {"tau_w", c.grid.tau_w},
                  {"eta", c.grid.eta}}},
        {"selector", {{"sharpe", c.selector.sharpe},
                      {"calmar", c.selector.calmar},
                      {"cagr", c.selector.cagr},
                      {"maxdd", c.selector.maxdd},
                      {"turnover", c.selector.turnover}}},
        {"walk_forward", {{"train_len", c.train_len}, {"test_len", c.test_len}}},
        {"signals", {{"z_min_obs", c.signals.z_min_obs},
                     {"change_horizon", c.signals.change_horizon},
                     {"vix_window", c.signals.vix_window},
                     {"vix_min_obs", c.signals.vix_min_obs},
                     {"gd_window", c.signals.gd_window},
                     {"softplus_tau", c.signals.softplus_tau}}},
        {"max_gap", c.max_gap},
        {"quintile_horizon", c.quintile_horizon},
        {"gate_horizon", c.gate_horizon},
        {"synth", {{"n_days", c.synth.n_days},
                   {"end_date", format_date(c.synth.end_date)},
                   {"vol_scale", c.synth.vol_scale},
                   {"planted_rate_effect", c.synth.planted_rate_effect},
                   {"missing_bar_prob", c.synth.missing_bar_prob},
                   {"staggered_listings", c.synth.staggered_listings},
                   {"include_credit", c.synth.include_credit},
                   {"include_factors", c.synth.include_factors}}},
    };
}

RunConfig run_config_from_json(const json& j) {
    RunConfig c = default_run_config();
    check_keys(j, to_json(c), "");
    c.experiment = get(j, "experiment", c.experiment);
    if (j.contains("data_dir") && !j.at("data_dir").is_null()) c.data_dir = get<std::string>(j, "data_dir", "");
    c.synthetic = get(j, "synthetic", c.synthetic);
    c.seed = get(j, "seed", c.seed);
    c.window = get_window(j, "window", c.window);
    c.attribution_window = get_window(j, "attribution_window", c.attribution_window);
    c.post2022_start = get_date(j, "post2022_start", c.post2022_start);
    if (j.contains("periods")) {
        c.periods.clear();
        for (const auto& p : j.at("periods")) {
            c.periods.push_back({get<std::string>(p, "name", ""), get_date(p, "start", Date{}),
                                 get_date(p, "end", Date{})});
        }
    }
    c.rolling_windows = get(j, "rolling_windows", c.rolling_windows);
    c.cost_bps = get(j, "cost_bps", c.cost_bps);
    c.cost_levels = get(j, "cost_levels", c.cost_levels);
    c.tilts = get(j, "tilts", c.tilts);
    if (j.contains("baskets")) {
        const auto& b = j.at("baskets");
        if (b.contains("growth")) {
            c.growth.name = get(b.at("growth"), "name", c.growth.name);
            c.growth.members = get(b.at("growth"), "members", c.growth.members);
        }
        if (b.contains("defensive")) {
            c.defensive.name = get(b.at("defensive"), "name", c.defensive.name);
            c.defensive.members = get(b.at("defensive"), "members", c.defensive.members);
        }
    }
    if (j.contains("selected")) c.selected = policy_from_json(j.at("selected"), c.selected);
    if (j.contains("tilt_base")) c.tilt_base = policy_from_json(j.at("tilt_base"), c.tilt_base);
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        c.grid.alpha = get(g, "alpha", c.grid.alpha);
        c.grid.lambda_s = get(g, "lambda_s", c.grid.lambda_s);
        c.grid.lambda_c = get(g, "lambda_c", c.grid.lambda_c);
        c.grid.lambda_credit = get(g, "lambda_credit", c.grid.lambda_credit);
        c.grid.lambda_rxcs = get(g, "lambda_rxcs", c.grid.lambda_rxcs);
        c.grid.max_tilt = get(g, "max_tilt", c.grid.max_tilt);
        c.grid.tau_w = get(g, "tau_w", c.grid.tau_w);
        c.grid.eta = get(g, "eta", c.grid.eta);
    }
    if (j.contains("selector")) {
        const auto& s = j.at("selector");
        c.selector.sharpe = get(s, "sharpe", c.selector.sharpe);
        c.selector.calmar = get(s, "calmar", c.selector.calmar);
        c.selector.cagr = get(s, "cagr", c.selector.cagr);
        c.selector.maxdd = get(s, "maxdd", c.selector.maxdd);
        c.selector.turnover = get(s, "turnover", c.selector.turnover);
    }
    if (j.contains("walk_forward")) {
        c.train_len = get(j.at("walk_forward"), "train_len", c.train_len);
        c.test_len = get(j.at("walk_forward"), "test_len", c.test_len);
    }
    if (j.contains("signals")) {
        const auto& s = j.at("signals");
        c.signals.z_min_obs = get(s, "z_min_obs", c.signals.z_min_obs);
        c.signals.change_horizon = get(s, "change_horizon", c.signals.change_horizon);
        c.signals.vix_window = get(s, "vix_window", c.signals.vix_window);
        c.signals.vix_min_obs = get(s, "vix_min_obs", c.signals.vix_min_obs);
        c.signals.gd_window = get(s, "gd_window", c.signals.gd_window);
        c.signals.softplus_tau = get(s, "softplus_tau", c.signals.softplus_tau);
    }
    c.max_gap = get(j, "max_gap", c.max_gap);
    c.quintile_horizon = get(j, "quintile_horizon", c.quintile_horizon);
    c.gate_horizon = get(j, "gate_horizon", c.gate_horizon);
    if (j.contains("synth")) {
        const auto& s = j.at("synth");
        c.synth.n_days = get(s, "n_days", c.synth.n_days);
        c.synth.end_date = get_date(s, "end_date", c.synth.end_date);
        c.synth.vol_scale = get(s, "vol_scale", c.synth.vol_scale);
        c.synth.planted_rate_effect = get(s, "planted_rate_effect", c.synth.planted_rate_effect);
        c.synth.missing_bar_prob = get(s, "missing_bar_prob", c.synth.missing_bar_prob);
        c.synth.staggered_listings = get(s, "staggered_listings", c.synth.staggered_listings);
        c.synth.include_credit = get(s, "include_credit", c.synth.include_credit);
        c.synth.include_factors = get(s, "include_factors", c.synth.include_factors);
    }
    c.synth.seed = c.seed;

    if (c.experiment != "all" &&
        std::find(experiment_names().begin(), experiment_names().end(), c.experiment) == experiment_names().end()) {
        throw UsageError("unknown experiment '" + c.experiment + "'");
    }
    if (c.cost_bps < 0.0) throw UsageError("cost_bps must be nonnegative");
    if (c.max_gap < 0) throw UsageError("max_gap must be nonnegative");
    if (c.signals.z_min_obs < 2) throw UsageError("signals.z_min_obs must be at least 2");
    return c;
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw UsageError("override '" + assignment + "' must look like key=value");
    }
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    json* node = &doc;
    std::size_t pos = 0;
    while (true) {
        const auto dot = path.find('.', pos);
        const std::string key = path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
        if (key.empty()) throw UsageError("override '" + assignment + "' has an empty key");
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        if (!node->contains(key) || !(*node)[key].is_object()) (*node)[key] = json::object();
        node = &(*node)[key];
        pos = dot + 1;
    }
}

namespace {

struct Context {
    const RunConfig& cfg;
    const StudyData& study;
    std::optional<Backtester> bt;  // per worker: the score cache is not shared
    std::vector<double> spy;       // on the pair calendar
    fs::path root;

    Backtester& backtester() { return *bt; }
    PolicyConfig with_cost(PolicyConfig c) const {
        c.cost_bps = cfg.cost_bps;
        return c;
    }
    GridSpec local_pool() const {
        GridSpec g = local_grid();
        g.axes = cfg.grid;
        g.base.cost_bps = cfg.cost_bps;
        return g;
    }
    fs::path dir(const std::string& name) const {
        const auto d = root / name;
        fs::create_directories(d);
        return d;
    }
    WindowRange range() { return bt->range(cfg.window); }
};

void emit(const fs::path& dir, const BacktestResult& r) {
    write_equity(dir, r);
    write_metrics(dir, r);
}

BacktestResult renamed(BacktestResult r, const std::string& name) {
    r.name = name;
    return r;
}

std::string pct_label(double w) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.0f%%", w * 100.0);
    return buf;
}

std::vector<std::pair<std::string, Metrics>> named(const std::vector<BacktestResult>& rows) {
    std::vector<std::pair<std::string, Metrics>> out;
    for (const auto& r : rows) out.emplace_back(r.name, r.metrics);
    return out;
}

/// A full-window path replayed on the trailing part of the window, weights carried over.
BacktestResult sub_path(Context& ctx, const BacktestResult& full, Date start, const std::string& name) {
    const auto window_range = ctx.range();
    const auto sub = ctx.backtester().range({start, ctx.cfg.window.end});
    const std::size_t skip = sub.begin - window_range.begin;
    const double initial = skip == 0 ? ctx.cfg.selected.w0 : full.weights_g[skip - 1];
    auto r = replay_weights(ctx.backtester().returns(), sub,
                            std::span<const double>(full.weights_g).subspan(skip), ctx.cfg.cost_bps, initial);
    r.name = name;
    return r;
}

void run_attribution(Context& ctx) {
    const auto dir = ctx.dir("attribution");
    coverage_table(ctx.study.coverage).write(dir, "data_coverage");
    if (!ctx.study.factors) {
        throw DataCoverageError(std::string("attribution needs the factor file '") + kFactorFileName + "'");
    }
    const auto& f = *ctx.study.factors;
    const auto& w = ctx.cfg.attribution_window;
    ReturnSeries gd;
    gd.symbol = "G-D";
    gd.dates = ctx.study.gd.dates;
    gd.values = ctx.study.gd.values;

    std::vector<std::pair<std::vector<std::string>, RegressionResult>> portfolios;
    portfolios.push_back({{"G"}, ols_hac(factor_regression_spec(ctx.study.growth, f, false, w))});
    portfolios.push_back({{"D"}, ols_hac(factor_regression_spec(ctx.study.defensive, f, false, w))});
    const auto gd_spec = factor_regression_spec(gd, f, true, w);
    portfolios.push_back({{"G-D"}, ols_hac(gd_spec)});
    attribution_table(portfolios, {"Portfolio"}, true).write(dir, "attribution_portfolios");

    std::vector<std::pair<std::vector<std::string>, RegressionResult>> etfs;
    const auto n_growth = ctx.cfg.growth.members.size();
    for (std::size_t i = 0; i < ctx.study.member_returns.size(); ++i) {
        const auto& m = ctx.study.member_returns[i];
        etfs.push_back({{m.symbol, i < n_growth ? ctx.cfg.growth.name : ctx.cfg.defensive.name},
                        ols_hac(factor_regression_spec(m, f, false, w))});
    }
    attribution_table(etfs, {"ETF", "Group"}, true).write(dir, "attribution_etfs");

    std::vector<NamedPeriod> periods;
    for (auto p : ctx.cfg.periods) {
        if (p.end < gd_spec.dates.front() || p.start > gd_spec.dates.back()) continue;
        p.start = std::max(p.start, gd_spec.dates.front());
        p.end = std::min(p.end, gd_spec.dates.back());
        periods.push_back(p);
    }
    if (!periods.empty()) period_table(period_attribution(gd_spec, periods)).write(dir, "attribution_periods");
    for (auto window : ctx.cfg.rolling_windows) {
        if (window <= gd_spec.dependent.size()) {
            rolling_table(rolling_attribution(gd_spec, window))
                .write(dir, "attribution_rolling_" + std::to_string(window));
        }
    }
}

void run_tilt(Context& ctx) {
    const auto dir = ctx.dir("tilt");
    auto results = tilt_sweep(ctx.backtester(), ctx.with_cost(ctx.cfg.tilt_base), ctx.cfg.tilts, ctx.cfg.window);
    std::vector<std::pair<std::string, Metrics>> rows;
    for (std::size_t i = 0; i < results.size(); ++i) {
        rows.emplace_back(pct_label(ctx.cfg.tilts[i]), results[i].metrics);
        char name[32];
        std::snprintf(name, sizeof name, "tilt %.2f", ctx.cfg.tilts[i]);
        emit(dir, renamed(results[i], name));
    }
    metrics_table(rows,
                  {MetricColumn::final_wealth, MetricColumn::cagr, MetricColumn::sharpe, MetricColumn::max_dd,
                   MetricColumn::calmar, MetricColumn::turnover, MetricColumn::avg_g},
                  "MaxTilt")
        .write(dir, "tilt");
}

void run_grid(Context& ctx) {
    const auto dir = ctx.dir("grid");
    const auto ranked = grid_search(ctx.backtester(), ctx.local_pool(), ctx.cfg.selector, ctx.cfg.window, ctx.cfg.cost_bps);
    ranked_table(ranked, 5).write(dir, "local_grid");
    ranked_table(ranked, ranked.size()).write(dir, "local_grid_all");
    emit(dir, renamed(ctx.backtester().run(ctx.with_cost(ctx.cfg.selected), ctx.cfg.window), "Selected Smooth Score"));
    emit(dir, renamed(ctx.backtester().run(ranked.front().config, ctx.cfg.window), "Top Ranked"));
}

struct MainRows {
    BacktestResult selected, tnx, core, fixed50;
    std::vector<BacktestResult> statics;  // 50/50, 100% G, 100% D, SPY
};

MainRows main_rows(Context& ctx) {
    auto& bt = ctx.backtester();
    const auto sel = ctx.with_cost(ctx.cfg.selected);
    MainRows m;
    m.selected = renamed(bt.run(sel, ctx.cfg.window), "Selected Smooth Score");
    m.tnx = renamed(bt.run(matched_policy(MatchedPolicyKind::tnx_only, sel), ctx.cfg.window), "Matched TNX-only");
    m.core = renamed(bt.run(matched_policy(MatchedPolicyKind::core_only, sel), ctx.cfg.window), "Matched Core-only");
    auto fixed = ctx.with_cost(ctx.cfg.tilt_base);
    fixed.max_tilt = 0.50;
    m.fixed50 = renamed(bt.run(fixed, ctx.cfg.window), "Fixed-Structure 50% Tilt");
    m.statics = static_benchmarks(bt.returns(), ctx.spy, ctx.range());
    return m;
}

void run_benchmarks(Context& ctx) {
    const auto dir = ctx.dir("benchmarks");
    const auto m = main_rows(ctx);
    std::vector<BacktestResult> rows{m.selected, m.tnx, m.core, m.fixed50};
    rows.insert(rows.end(), m.statics.begin(), m.statics.end());
    const auto table = metrics_table(named(rows),
                                     {MetricColumn::final_wealth, MetricColumn::cagr, MetricColumn::vol,
                                      MetricColumn::sharpe, MetricColumn::sortino, MetricColumn::max_dd,
                                      MetricColumn::turnover, MetricColumn::avg_g});
    table.write(dir, "selected_summary");
    table.write(dir, "benchmarks");
    for (const auto& r : rows) emit(dir, r);

    std::vector<std::pair<std::string, PairStats>> pairs;
    for (const auto* other : {&m.tnx, &m.core, &m.fixed50, &m.statics[0], &m.statics[1], &m.statics[3]}) {
        pairs.emplace_back("Selected Policy - " + other->name, pair_stats(m.selected.net, other->net));
    }
    pair_table(pairs).write(dir, "incremental");
    pair_table(pairs).write(dir, "pair_stats");
}

void run_volmatch(Context& ctx) {
    const auto dir = ctx.dir("volmatch");
    auto& bt = ctx.backtester();
    const auto range = ctx.range();
    const auto sel = renamed(bt.run(ctx.with_cost(ctx.cfg.selected), ctx.cfg.window), "Selected Smooth Score");
    const auto statics = static_benchmarks(bt.returns(), {}, range);
    const auto& g_only = statics[1];
    const auto& half = statics[0];
    const auto g = std::span<const double>(bt.returns().g).subspan(range.begin, range.end - range.begin);
    const auto d = std::span<const double>(bt.returns().d).subspan(range.begin, range.end - range.begin);

    const auto vm = vol_match_weight(g_only.net, sel.metrics.vol);
    const auto scaled = scale_series(g_only.net, vm.weight);
    Metrics scaled_metrics = compute_metrics(scaled);
    scaled_metrics.turnover_annual = 0.0;
    scaled_metrics.avg_g = vm.weight;

    const auto vol_static = matched_static_search(MatchCriterion::vol, sel.metrics.vol, g, d);
    const auto dd_static = matched_static_search(MatchCriterion::maxdd, sel.metrics.max_dd, g, d);
    const auto best_static = matched_static_search(MatchCriterion::sharpe, 0.0, g, d);

    struct Row {
        std::string name;
        Metrics metrics;
        std::vector<double> net;
    };
    std::vector<Row> rows{{sel.name, sel.metrics, sel.net},
                          {"100% G", g_only.metrics, g_only.net},
                          {"Vol-Matched 100% G", scaled_metrics, scaled},
                          {"50/50 G/D", half.metrics, half.net}};
    for (const auto& [label, match] : {std::pair<const char*, const StaticMatch*>{"Vol-Matched Static G/D", &vol_static},
                                       {"MaxDD-Matched Static G/D", &dd_static},
                                       {"Best Sharpe Static G/D", &best_static}}) {
        rows.push_back({std::string(label) + " (" + pct_label(match->weight_g) + " G)", match->metrics,
                        static_mix(match->weight_g, g, d)});
    }
    Table t({{"Method"},
             {"CAGR", ColumnFormat::percent},
             {"Vol", ColumnFormat::percent},
             {"Sharpe", ColumnFormat::ratio},
             {"Max DD", ColumnFormat::percent},
             {"Turnover", ColumnFormat::percent},
             {"Excess vs Smooth", ColumnFormat::percent}});
    for (const auto& r : rows) {
        t.add_row({r.name, r.metrics.cagr, r.metrics.vol, r.metrics.sharpe, r.metrics.max_dd,
                   r.metrics.turnover_annual, pair_stats(r.net, sel.net).annual_excess});
    }
    t.write(dir, "vol_matched");
    Table weight({{"Vol-Match Weight", ColumnFormat::percent}, {"Levered"}});
    weight.add_row({vm.weight, std::string(vm.levered ? "yes" : "no")});
    weight.write(dir, "vol_match_weight");
}

void write_validation(const fs::path& dir, const std::string& name, const ValidationTable& table) {
    metrics_table(named(table.rows), {MetricColumn::final_wealth, MetricColumn::cagr, MetricColumn::vol,
                                      MetricColumn::sharpe, MetricColumn::sortino, MetricColumn::max_dd,
                                      MetricColumn::turnover, MetricColumn::avg_g})
        .write(dir, name);
    for (const auto& r : table.rows) emit(dir, r);
    const char* modes[] = {"expanding", "rolling", "fixed"};
    for (std::size_t i = 0; i < table.walk_forward.size(); ++i) {
        blocks_table(table.walk_forward[i].blocks).write(dir, name + "_blocks_" + modes[i]);
    }
}

void run_walkforward(Context& ctx) {
    const auto table = oos_validation(ctx.backtester(), ctx.local_pool(), ctx.cfg.selector, ctx.cfg.window,
                                      std::nullopt, ctx.spy, ctx.cfg.cost_bps);
    write_validation(ctx.dir("walkforward"), "oos", table);
}

void run_post2022(Context& ctx) {
    const auto table = post_2022_validation(ctx.backtester(), ctx.local_pool(), ctx.cfg.selector, ctx.cfg.window,
                                            ctx.cfg.post2022_start, ctx.spy, ctx.cfg.cost_bps);
    write_validation(ctx.dir("post2022"), "post2022", table);
}

void run_credit(Context& ctx) {
    auto& bt = ctx.backtester();
    if (!bt.frame().has_credit()) {
        throw DataCoverageError("the credit experiment needs the BAA10Y series (BAA10Y.csv)");
    }
    const auto dir = ctx.dir("credit");
    GridSpec replacement = credit_replacement_grid();
    replacement.axes.max_tilt = ctx.cfg.grid.max_tilt;
    replacement.axes.tau_w = ctx.cfg.grid.tau_w;
    replacement.axes.eta = ctx.cfg.grid.eta;
    replacement.base.cost_bps = ctx.cfg.cost_bps;
    GridSpec incremental = credit_incremental_grid();
    incremental.base = ctx.with_cost(ctx.cfg.selected);
    incremental.axes.alpha = {incremental.base.score.alpha};
    incremental.axes.lambda_s = {incremental.base.score.lambda_s};
    incremental.axes.lambda_c = {incremental.base.score.lambda_c};
    incremental.axes.max_tilt = {incremental.base.max_tilt};
    incremental.axes.tau_w = {incremental.base.tau_w};
    incremental.axes.eta = {incremental.base.eta};

    const auto grids = credit_grids(bt, replacement, incremental, ctx.cfg.selector, ctx.cfg.window, ctx.cfg.cost_bps);
    ranked_table(grids.replacement, grids.replacement.size()).write(dir, "credit_replacement_grid");
    ranked_table(grids.incremental, grids.incremental.size()).write(dir, "credit_incremental_grid");

    const auto best_rep = grids.replacement.front().config;
    auto core = best_rep;
    core.kind = ScoreKind::credit_core;
    const auto best_inc = grids.incremental.front().config;
    const auto local = ctx.with_cost(ctx.cfg.selected);
    const auto local_full = renamed(bt.run(local, ctx.cfg.window), "Existing Smooth Score Best Local");
    const auto statics = static_benchmarks(bt.returns(), ctx.spy, ctx.range());

    std::vector<BacktestResult> main{renamed(bt.run(best_rep, ctx.cfg.window), "Bond/Credit Smooth Score Best"),
                                     renamed(bt.run(core, ctx.cfg.window), "Bond/Credit Core Only"),
                                     renamed(bt.run(best_inc, ctx.cfg.window), "Old Best + Bond/Credit Incremental"),
                                     local_full, statics[0], statics[1], statics[3]};
    metrics_table(named(main), {MetricColumn::final_wealth, MetricColumn::cagr, MetricColumn::vol, MetricColumn::sharpe,
                                MetricColumn::max_dd, MetricColumn::calmar, MetricColumn::turnover, MetricColumn::avg_g})
        .write(dir, "bond_credit_main");
    for (const auto& r : main) emit(dir, r);

    const std::vector<MetricColumn> oos_cols{MetricColumn::final_wealth, MetricColumn::cagr, MetricColumn::vol,
                                             MetricColumn::sharpe, MetricColumn::max_dd, MetricColumn::turnover,
                                             MetricColumn::avg_g};
    for (const auto& [name, start] : {std::pair<std::string, std::optional<Date>>{"bond_credit_oos", std::nullopt},
                                      {"bond_credit_post2022", ctx.cfg.post2022_start}}) {
        const auto rep = oos_validation(bt, replacement, ctx.cfg.selector, ctx.cfg.window, start, {}, ctx.cfg.cost_bps,
                                        "Bond/Credit");
        const auto inc = oos_validation(bt, incremental, ctx.cfg.selector, ctx.cfg.window, start, {}, ctx.cfg.cost_bps,
                                        "Old+Credit");
        std::vector<BacktestResult> rows(rep.rows.begin(), rep.rows.begin() + 3);
        rows.insert(rows.end(), inc.rows.begin(), inc.rows.begin() + 3);
        const Date oos_first = rep.rows.front().dates.front();
        rows.push_back(sub_path(ctx, local_full, oos_first, local_full.name));
        rows.push_back(rep.rows[3]);  // 50/50
        if (start) rows.push_back(rep.rows[4]);  // 100% G
        metrics_table(named(rows), oos_cols).write(dir, name);
        const auto sub = ctx.dir("credit/" + name);
        for (const auto& r : rows) emit(sub, r);
    }

    cost_table(cost_sensitivity(bt, best_inc, ctx.cfg.cost_levels, ctx.cfg.window)).write(dir, "appendix_old_credit_cost");
}

void run_diagnostics(Context& ctx) {
    auto& bt = ctx.backtester();
    const auto dir = ctx.dir("diagnostics");
    const auto range = ctx.range();
    const std::size_t len = range.end - range.begin;
    const auto sel = ctx.with_cost(ctx.cfg.selected);
    auto fixed = ctx.with_cost(ctx.cfg.tilt_base);
    fixed.max_tilt = 0.50;
    const std::vector<std::pair<std::string, PolicyConfig>> scores{
        {"Selected Smooth Score", sel},
        {"Matched Core-only", matched_policy(MatchedPolicyKind::core_only, sel)},
        {"Fixed-Structure 50% Tilt", fixed},
        {"Matched TNX-only", matched_policy(MatchedPolicyKind::tnx_only, sel)}};
    const auto gd = std::span<const double>(ctx.study.gd_on_frame).subspan(range.frame_offset, len);
    std::vector<std::pair<std::string, QuintileResult>> quintiles;
    for (const auto& [name, c] : scores) {
        const auto s = std::span<const double>(bt.score_z(c)).subspan(range.frame_offset, len);
        quintiles.emplace_back(name, quintile_diagnostic(s, gd, ctx.cfg.quintile_horizon));
    }
    quintile_table(quintiles).write(dir, "score_diagnostic");

    const auto selected = bt.run(sel, range);
    const auto statics = static_benchmarks(bt.returns(), {}, range);
    yearly_table({{"Selected Smooth Score", yearly_breakdown(selected.dates, selected.net)},
                  {"100% G", yearly_breakdown(statics[1].dates, statics[1].net)},
                  {"50/50 G/D", yearly_breakdown(statics[0].dates, statics[0].net)},
                  {"100% D", yearly_breakdown(statics[2].dates, statics[2].net)}})
        .write(dir, "yearly_breakdown");

    const auto gates = gate_regressions(bt.frame(), ctx.study.gd_on_frame, ctx.cfg.gate_horizon);
    main_gate_table(gates.main_effects).write(dir, "appendix_bc_main_gate");
    if (gates.interaction) interaction_gate_table(*gates.interaction).write(dir, "appendix_bc_interaction_gate");

    signals_table(bt.frame(), {{"gd", ctx.study.gd_on_frame}, {"score_z_selected", bt.score_z(sel)}})
        .write(dir, "signals");
}

json conventions(const RunConfig& c) {
    return {
        {"returns", "simple daily returns; wealth compounds multiplicatively"},
        {"trading_days_per_year", kTradingDaysPerYear},
        {"basket_rebalancing", "daily equal weight (mean of member returns)"},
        {"forward_fill_max_gap", c.max_gap},
        {"master_calendar", "union of SPY and member dates, bounded forward fill, then intersection"},
        {"level_fill", "last observation carried forward for at most max_gap calendar dates"},
        {"hac", "Newey-West, Bartlett kernel, no small-sample correction"},
        {"hac_default_lags", "floor(4*(n/100)^(2/9))"},
        {"gate_hac_lags", "horizon+5 overlapping; default rule for the every-horizon-th sample"},
        {"alpha_annualization", "(1+alpha_daily)^252-1"},
        {"zscore", "expanding, sample std (n-1), missing below min_obs or at zero variance"},
        {"z_min_obs", c.signals.z_min_obs},
        {"target_weight", "0.5+max_tilt*tanh(score_z/tau_w)"},
        {"ewma", "w_t=(1-eta)w_{t-1}+eta*target_t; missing target holds w_{t-1}"},
        {"execution_lag_days", 1},
        {"cost", "2*|dw|*bps/1e4 on the applied-weight change"},
        {"cagr", "final_wealth^(252/n)-1"},
        {"vol", "sample std*sqrt(252)"},
        {"sharpe", "mean/std*sqrt(252), no risk-free rate"},
        {"sortino", "mean*252/(sqrt(mean(min(r,0)^2))*sqrt(252))"},
        {"max_drawdown", "wealth path starting at 1.0"},
        {"turnover", "252/n*sum(2|dw|)"},
        {"pair_excess", "252*mean(a-b)"},
        {"selector", "weighted mean of cross-config z-scores of sharpe, calmar, cagr, -|maxdd|, -turnover"},
        {"selector_weights", {{"sharpe", c.selector.sharpe},
                              {"calmar", c.selector.calmar},
                              {"cagr", c.selector.cagr},
                              {"maxdd", c.selector.maxdd},
                              {"turnover", c.selector.turnover}}},
        {"walk_forward", "training metrics sliced from each config's full-window path; one EWMA state across blocks"},
        {"quintile_horizon", c.quintile_horizon},
        {"gate_horizon", c.gate_horizon},
    };
}

}  // namespace

RunOutcome run(const RunConfig& cfg, const std::vector<std::string>& overrides) {
    std::vector<std::string> todo;
    if (cfg.experiment == "all") {
        todo = experiment_names();
    } else if (std::find(experiment_names().begin(), experiment_names().end(), cfg.experiment) !=
               experiment_names().end()) {
        todo = {cfg.experiment};
    } else {
        throw UsageError("unknown experiment '" + cfg.experiment + "'");
    }

    fs::create_directories(cfg.out_dir);
    RawDataSet raw;
    json data_info;
    if (cfg.synthetic) {
        SynthParams p = cfg.synth;
        p.seed = cfg.seed;
        const auto data_dir = cfg.out_dir / "data";
        write_dataset(synth_data(p), data_dir);
        raw = load_dataset(data_dir, cfg.growth, cfg.defensive);
        data_info["source"] = "synthetic";
    } else {
        std::optional<fs::path> dir = cfg.data_dir;
        if (!dir) {
            if (const char* env = std::getenv("STL_DATA_DIR"); env && *env) dir = fs::path(env);
        }
        if (!dir) throw UsageError("no data: pass --data-dir, set STL_DATA_DIR, or use --synthetic");
        raw = load_dataset(*dir, cfg.growth, cfg.defensive);
        data_info["source"] = "directory";
    }
    data_info["checksums"] = raw.checksums;

    const StudyData study = prepare_study(raw, cfg.signals, cfg.max_gap);
    if (study.spy.dates != study.pair.dates) throw ValidationError("SPY is not on the basket calendar");

    const std::map<std::string, std::function<void(Context&)>> runners{
        {"attribution", run_attribution}, {"tilt", run_tilt},         {"grid", run_grid},
        {"benchmarks", run_benchmarks},   {"volmatch", run_volmatch}, {"walkforward", run_walkforward},
        {"post2022", run_post2022},       {"credit", run_credit},     {"diagnostics", run_diagnostics}};

    RunOutcome outcome;
    outcome.out_dir = cfg.out_dir;
    json skipped = json::array();
    std::vector<std::pair<std::string, std::future<void>>> workers;
    for (const auto& name : todo) {
        const bool optional_data = cfg.experiment == "all" &&
                                   ((name == "credit" && !study.frame.has_credit()) ||
                                    (name == "attribution" && !study.factors));
        if (optional_data) {
            outcome.skipped.push_back(name);
            skipped.push_back({{"experiment", name}, {"reason", "input series not supplied"}});
            if (name == "attribution") {
                fs::create_directories(cfg.out_dir / "attribution");
                coverage_table(study.coverage).write(cfg.out_dir / "attribution", "data_coverage");
            }
            continue;
        }
        const auto& runner = runners.at(name);
        workers.emplace_back(name, std::async(std::launch::async, [&cfg, &study, &runner] {
                                 Context ctx{cfg, study, std::nullopt, study.spy.values, cfg.out_dir};
                                 ctx.bt.emplace(study.pair, study.frame);
                                 runner(ctx);
                             }));
    }
    // wait for every worker before surfacing the first failure
    std::exception_ptr failure;
    for (auto& [name, fut] : workers) {
        try {
            fut.get();
            outcome.experiments.push_back(name);
        } catch (...) {
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    json config_echo = to_json(cfg);
    if (cfg.synthetic) config_echo["data_dir"] = nullptr;
    json manifest{{"version", kVersion},
                  {"config", config_echo},
                  {"overrides", overrides},
                  {"data", data_info},
                  {"conventions", conventions(cfg)},
                  {"experiments", outcome.experiments},
                  {"skipped", skipped}};
    std::ofstream out(cfg.out_dir / "manifest.json", std::ios::binary);
    if (!out) throw Error("cannot write manifest in '" + cfg.out_dir.string() + "'");
    out << manifest.dump(2) << '\n';
    return outcome;
}

}  // namespace styletiming
