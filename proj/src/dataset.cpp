#include "styletiming/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "styletiming/errors.hpp"
#include "styletiming/stats.hpp"

namespace styletiming {

namespace fs = std::filesystem;

namespace {

fs::path require_file(const fs::path& dir, const std::string& name) {
    const auto path = dir / name;
    if (!fs::is_regular_file(path)) {
        throw DataCoverageError("required data file '" + path.string() + "' is missing");
    }
    return path;
}

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void write_series(const DatedSeries& s, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << "date,value\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        out << format_date(s.dates[i]) << ',' << format_value(s.values[i]) << '\n';
    }
}

}  // namespace

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataCoverageError("cannot read '" + path.string() + "'");
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 15];
    while (in) {
        in.read(buf, sizeof buf);
        EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) {
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    }
    return hex.str();
}

RawDataSet load_dataset(const fs::path& dir, const BasketDef& growth, const BasketDef& defensive) {
    if (!fs::is_directory(dir)) {
        throw DataCoverageError("data directory '" + dir.string() + "' does not exist");
    }
    RawDataSet data;
    data.growth = growth;
    data.defensive = defensive;
    auto record = [&](const fs::path& p) { data.checksums[p.filename().string()] = sha256_file(p); };

    for (const auto* basket : {&growth, &defensive}) {
        for (const auto& sym : basket->members) {
            const auto p = require_file(dir, sym + ".csv");
            data.members.push_back(load_price_series(p));
            record(p);
        }
    }
    const auto spy = require_file(dir, "SPY.csv");
    data.spy = load_price_series(spy);
    record(spy);
    const auto tnx = require_file(dir, "TNX.csv");
    data.tnx = load_level_series(tnx);
    record(tnx);
    const auto vix = require_file(dir, "VIX.csv");
    data.vix = load_level_series(vix);
    record(vix);
    if (fs::is_regular_file(dir / "BAA10Y.csv")) {
        data.baa10y = load_level_series(dir / "BAA10Y.csv");
        record(dir / "BAA10Y.csv");
    }
    if (fs::is_regular_file(dir / kFactorFileName)) {
        data.factors = load_factor_file(dir / kFactorFileName);
        record(dir / kFactorFileName);
    }
    return data;
}

void write_dataset(const RawDataSet& data, const fs::path& dir) {
    fs::create_directories(dir);
    for (const auto& m : data.members) write_series(m, dir / (m.symbol + ".csv"));
    write_series(data.spy, dir / "SPY.csv");
    write_series(data.tnx, dir / "TNX.csv");
    write_series(data.vix, dir / "VIX.csv");
    if (data.baa10y) write_series(*data.baa10y, dir / "BAA10Y.csv");
    if (data.factors) {
        const auto& f = *data.factors;
        std::ofstream out(dir / kFactorFileName, std::ios::binary);
        if (!out) throw Error("cannot write factor file in '" + dir.string() + "'");
        out << "date,mkt_rf,smb,hml,rmw,cma,mom,rf\n";
        for (std::size_t i = 0; i < f.size(); ++i) {
            out << format_date(f.dates[i]);
            for (const auto& col : f.factors) out << ',' << format_value(col[i]);
            out << ',' << format_value(f.rf[i]) << '\n';
        }
    }
}

std::vector<double> sample_levels_causal(const DatedSeries& levels, const Calendar& calendar,
                                         int max_gap) {
    if (max_gap < 0) throw ValidationError("level fill max_gap must be nonnegative");
    std::vector<double> out(calendar.size(), kMissing);
    std::size_t j = 0;
    bool have = false;
    double last = 0.0;
    int since = 0;
    for (std::size_t k = 0; k < calendar.size(); ++k) {
        bool observed = false;
        while (j < levels.size() && levels.dates[j] <= calendar[k]) {
            if (levels.dates[j] == calendar[k]) observed = true;
            last = levels.values[j];
            have = true;
            since = 0;
            ++j;
        }
        if (observed) {
            out[k] = last;
        } else if (have) {
            // an observation between calendar dates still counts as seen before this date
            if (since < max_gap) out[k] = last;
            ++since;
        }
    }
    return out;
}

StudyData prepare_study(const RawDataSet& raw, const SignalSettings& settings, int max_gap) {
    StudyData study;
    std::vector<const DatedSeries*> prices{&raw.spy};
    for (const auto& m : raw.members) prices.push_back(&m);
    const Calendar all_dates = union_calendar(prices);

    std::vector<DatedSeries> returns;
    std::vector<PriceSeries> filled;
    filled.reserve(prices.size());
    for (const auto* p : prices) {
        filled.push_back(forward_fill_bounded(static_cast<const PriceSeries&>(*p), all_dates, max_gap));
        ReturnSeries r = to_returns(filled.back(), all_dates);
        if (r.empty()) {
            throw DataCoverageError("series '" + p->symbol + "' has no returns");
        }
        returns.push_back(std::move(r));
    }
    const AlignedPanel panel = align(returns, all_dates.front(), all_dates.back());

    auto group_of = [&](const std::string& sym) -> std::string {
        if (std::find(raw.growth.members.begin(), raw.growth.members.end(), sym) != raw.growth.members.end())
            return raw.growth.name;
        if (std::find(raw.defensive.members.begin(), raw.defensive.members.end(), sym) !=
            raw.defensive.members.end())
            return raw.defensive.name;
        return "benchmark";
    };
    for (auto row : panel.coverage) {
        row.group = group_of(row.symbol);
        study.coverage.push_back(row);
    }

    auto on_master = [&](const std::string& sym) {
        ReturnSeries s;
        s.symbol = sym;
        s.dates = panel.dates;
        s.values = panel.column(sym);
        return s;
    };
    std::vector<ReturnSeries> g_members, d_members;
    for (const auto& sym : raw.growth.members) g_members.push_back(on_master(sym));
    for (const auto& sym : raw.defensive.members) d_members.push_back(on_master(sym));
    study.member_returns = g_members;
    study.member_returns.insert(study.member_returns.end(), d_members.begin(), d_members.end());
    study.growth = basket_returns(raw.growth.name, g_members);
    study.defensive = basket_returns(raw.defensive.name, d_members);
    study.spy = on_master(raw.spy.symbol);
    study.gd = relative(study.growth, study.defensive);
    study.pair = ReturnPair::from(study.growth, study.defensive);

    // State calendar: SPY's filled dates before the baskets start, then the master calendar.
    const Date master_start = panel.dates.front();
    const auto& spy_filled = filled.front();
    Calendar state;
    for (const auto& d : spy_filled.dates) {
        if (d < master_start) state.push_back(d);
    }
    state.insert(state.end(), panel.dates.begin(), panel.dates.end());

    RawStateInputs inputs;
    inputs.dates = state;
    inputs.tnx = sample_levels_causal(raw.tnx, state, max_gap);
    inputs.vix = sample_levels_causal(raw.vix, state, max_gap);
    inputs.spy = sample_levels_causal(raw.spy, state, max_gap);
    if (raw.baa10y) inputs.baa10y = sample_levels_causal(*raw.baa10y, state, max_gap);
    inputs.gd.assign(state.size(), kMissing);
    const std::size_t offset = state.size() - panel.dates.size();
    for (std::size_t i = 0; i < study.gd.size(); ++i) inputs.gd[offset + i] = study.gd.values[i];
    study.gd_on_frame = inputs.gd;
    study.frame = build_signal_frame(inputs, settings);
    study.factors = raw.factors;
    return study;
}

}  // namespace styletiming
