#include "claimledger/gas.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace claimledger {

std::string_view operation_name(OperationKind op) {
    switch (op) {
    case OperationKind::Deploy: return "Deploy";
    case OperationKind::Submit: return "Submit";
    case OperationKind::MultiSig: return "MultiSig";
    }
    return "Unknown";
}

void GasSchedule::validate() const {
    if (deploy_gas == 0 || submit_base_gas == 0 || submit_per_line_gas == 0 ||
        multisig_per_signature_gas == 0) {
        throw std::invalid_argument("gas schedule entries must all be positive");
    }
}

GasSchedule GasSchedule::defaults() {
    // 268,000 + 2 x 25,000 = 318,000 for the reference submit; 2 x 50,000
    // for the reference multisig.
    return GasSchedule{1'240'000, 268'000, 25'000, 50'000};
}

std::uint64_t meter(OperationKind op, std::size_t line_count, std::size_t signature_count,
                    const GasSchedule& schedule) {
    switch (op) {
    case OperationKind::Deploy: return schedule.deploy_gas;
    case OperationKind::Submit: return schedule.submit_base_gas + line_count * schedule.submit_per_line_gas;
    case OperationKind::MultiSig: return signature_count * schedule.multisig_per_signature_gas;
    }
    return 0;
}

std::uint64_t reference_gas(OperationKind op, const GasSchedule& schedule) {
    return meter(op, kReferenceClaimLines, kReferenceSignatures, schedule);
}

double day_cost_usd(std::uint64_t gas, const PricePoint& point) {
    return static_cast<double>(gas) * point.gas_price_gwei * 1e-9 * point.token_usd;
}

CostReport cost_report(OperationKind op, std::uint64_t gas, std::span<const PricePoint> series) {
    if (series.empty()) throw EmptySeries();
    CostReport report{op, day_cost_usd(gas, series.front()), day_cost_usd(gas, series.front()), 0};
    long double sum = 0;
    for (const auto& p : series) {
        double usd = day_cost_usd(gas, p);
        report.min_usd = std::min(report.min_usd, usd);
        report.max_usd = std::max(report.max_usd, usd);
        sum += usd;
    }
    double mean = static_cast<double>(sum / static_cast<long double>(series.size()));
    // The exact mean lies in [min, max]; clamp away accumulated rounding.
    report.mean_usd = std::clamp(mean, report.min_usd, report.max_usd);
    return report;
}

std::vector<CostReport> reference_reports(const GasSchedule& schedule,
                                          std::span<const PricePoint> series) {
    std::vector<CostReport> out;
    for (auto op : {OperationKind::Deploy, OperationKind::Submit, OperationKind::MultiSig}) {
        out.push_back(cost_report(op, reference_gas(op, schedule), series));
    }
    return out;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

} // namespace

std::chrono::year_month_day parse_iso_date(std::string_view text) {
    using namespace std::chrono;
    int y = 0;
    unsigned m = 0, d = 0;
    if (text.size() != 10 || text[4] != '-' || text[7] != '-' ||
        !parse_number(text.substr(0, 4), y) || !parse_number(text.substr(5, 2), m) ||
        !parse_number(text.substr(8, 2), d)) {
        throw std::invalid_argument("expected YYYY-MM-DD, got '" + std::string(text) + "'");
    }
    year_month_day ymd{year{y}, month{m}, day{d}};
    if (!ymd.ok()) throw std::invalid_argument("invalid calendar date '" + std::string(text) + "'");
    return ymd;
}

std::string format_iso_date(std::chrono::year_month_day day) {
    return fmt::format("{:04}-{:02}-{:02}", static_cast<int>(day.year()),
                       static_cast<unsigned>(day.month()), static_cast<unsigned>(day.day()));
}

std::vector<PricePoint> parse_price_csv(std::string_view text) {
    std::vector<PricePoint> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool header_seen = false;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        auto line = trim(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (line.empty()) continue;
        if (!header_seen) {
            if (line != "day,gas_price_gwei,token_usd") {
                throw PriceSeriesError(line_no, "expected header 'day,gas_price_gwei,token_usd'");
            }
            header_seen = true;
            continue;
        }
        std::vector<std::string_view> cols;
        std::size_t start = 0;
        while (true) {
            auto comma = line.find(',', start);
            cols.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                                     : comma - start)));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (cols.size() != 3) throw PriceSeriesError(line_no, "expected 3 columns");
        PricePoint p;
        try {
            p.day = parse_iso_date(cols[0]);
        } catch (const std::invalid_argument& e) {
            throw PriceSeriesError(line_no, e.what());
        }
        if (!parse_number(cols[1], p.gas_price_gwei) || !parse_number(cols[2], p.token_usd)) {
            throw PriceSeriesError(line_no, "non-numeric price");
        }
        if (!(p.gas_price_gwei > 0) || !(p.token_usd > 0) || !std::isfinite(p.gas_price_gwei) ||
            !std::isfinite(p.token_usd)) {
            throw PriceSeriesError(line_no, "prices must be positive and finite");
        }
        if (!out.empty() && std::chrono::sys_days(p.day) <= std::chrono::sys_days(out.back().day)) {
            throw PriceSeriesError(line_no, "days must be strictly increasing");
        }
        out.push_back(p);
    }
    if (!header_seen) throw PriceSeriesError(1, "missing header");
    return out;
}

std::int64_t to_cents_half_even(double usd) {
    // nearbyint honours the current rounding mode, which defaults to ties-to-even.
    return static_cast<std::int64_t>(std::nearbyint(usd * 100.0));
}

std::string format_usd(double usd) {
    auto cents = to_cents_half_even(usd);
    auto sign = cents < 0 ? "-" : "";
    auto abs_cents = cents < 0 ? -cents : cents;
    return fmt::format("{}{}.{:02}", sign, abs_cents / 100, abs_cents % 100);
}

std::string format_reports_csv(std::span<const CostReport> reports) {
    std::string out = "operation,min_usd,max_usd,mean_usd\n";
    for (const auto& r : reports) {
        out += fmt::format("{},{},{},{}\n", operation_name(r.operation), format_usd(r.min_usd),
                           format_usd(r.max_usd), format_usd(r.mean_usd));
    }
    return out;
}

std::string format_reports_table(std::span<const CostReport> reports) {
    std::string out = fmt::format("{:<10} {:>12} {:>12} {:>12}\n", "operation", "min_usd", "max_usd",
                                  "mean_usd");
    for (const auto& r : reports) {
        out += fmt::format("{:<10} {:>12} {:>12} {:>12}\n", operation_name(r.operation),
                           format_usd(r.min_usd), format_usd(r.max_usd), format_usd(r.mean_usd));
    }
    return out;
}

} // namespace claimledger
