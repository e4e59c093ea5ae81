#pragma once

#include <chrono>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace claimledger {

enum class OperationKind : std::uint8_t { Deploy, Submit, MultiSig };

std::string_view operation_name(OperationKind op);

struct GasSchedule {
    std::uint64_t deploy_gas = 0;
    std::uint64_t submit_base_gas = 0;
    std::uint64_t submit_per_line_gas = 0;
    std::uint64_t multisig_per_signature_gas = 0;

    /// Throws std::invalid_argument unless every field is positive.
    void validate() const;

    /// Calibrated so that, at the reference claim shape below, the three
    /// operations meter 1,240,000 : 318,000 : 100,000 gas.
    static GasSchedule defaults();

    bool operator==(const GasSchedule&) const = default;
};

/// Reference shape used when one number per operation is needed: a
/// two-line claim and a two-signature envelope.
inline constexpr std::size_t kReferenceClaimLines = 2;
inline constexpr std::size_t kReferenceSignatures = 2;

/// Average USD per operation observed on live networks over a 100-day
/// window. Historical market data, kept for ratio comparisons only.
struct PublishedAverages {
    double deploy_usd;
    double submit_usd;
    double multisig_usd;
};
inline constexpr PublishedAverages kEthereumAverages{80.22, 20.60, 6.47};
inline constexpr PublishedAverages kOptimismAverages{0.35, 0.089, 0.028};

std::uint64_t meter(OperationKind op, std::size_t line_count, std::size_t signature_count,
                    const GasSchedule& schedule);

/// Gas for each operation at the reference claim shape.
std::uint64_t reference_gas(OperationKind op, const GasSchedule& schedule);

struct PricePoint {
    std::chrono::year_month_day day;
    double gas_price_gwei = 0;
    double token_usd = 0;
};

class EmptySeries : public std::invalid_argument {
public:
    EmptySeries() : std::invalid_argument("price series is empty") {}
};

class PriceSeriesError : public std::runtime_error {
public:
    PriceSeriesError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line(line) {}

    std::size_t line;
};

/// gas * gas_price * 1e-9 * token_price.
double day_cost_usd(std::uint64_t gas, const PricePoint& point);

struct CostReport {
    OperationKind operation = OperationKind::Deploy;
    double min_usd = 0;
    double max_usd = 0;
    double mean_usd = 0;
};

/// Throws EmptySeries.
CostReport cost_report(OperationKind op, std::uint64_t gas, std::span<const PricePoint> series);

/// One report per operation at the reference shape, Deploy/Submit/MultiSig order.
std::vector<CostReport> reference_reports(const GasSchedule& schedule,
                                          std::span<const PricePoint> series);

/// CSV with header `day,gas_price_gwei,token_usd`. Rejects malformed rows,
/// non-positive prices and non-increasing days with PriceSeriesError.
std::vector<PricePoint> parse_price_csv(std::string_view text);

std::chrono::year_month_day parse_iso_date(std::string_view text);
std::string format_iso_date(std::chrono::year_month_day day);

/// Rounds half-to-even to whole cents.
std::int64_t to_cents_half_even(double usd);
std::string format_usd(double usd);

std::string format_reports_csv(std::span<const CostReport> reports);
std::string format_reports_table(std::span<const CostReport> reports);

} // namespace claimledger
