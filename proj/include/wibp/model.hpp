#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "wibp/rng.hpp"
#include "wibp/summation.hpp"

namespace wibp {

// ---------------------------------------------------------------------------
// Weight law
// ---------------------------------------------------------------------------

struct ConstantWeight {
    double value;
};

struct UniformWeight {
    double lower;
    double upper;
};

/// R = first with probability p_first, otherwise second.
struct TwoPointWeight {
    double first;
    double second;
    double p_first;
};

/// Law of the i.i.d. customer weights R_n. Construction validates the
/// variant; the moments are exact closed forms.
class WeightSpec {
public:
    using Variant = std::variant<ConstantWeight, UniformWeight, TwoPointWeight>;

    WeightSpec(Variant law);  // NOLINT(google-explicit-constructor)

    static WeightSpec constant(double r) { return WeightSpec(ConstantWeight{r}); }
    static WeightSpec uniform(double u, double b) { return WeightSpec(UniformWeight{u, b}); }
    static WeightSpec two_point(double v1, double v2, double p) {
        return WeightSpec(TwoPointWeight{v1, v2, p});
    }

    /// Parses "const:r", "unif:u,b" or "twopoint:v1,v2,p".
    static WeightSpec parse(const std::string& text);
    std::string to_string() const;

    const Variant& law() const noexcept { return law_; }
    double lower_bound() const noexcept { return lower_; }
    double upper_bound() const noexcept { return upper_; }
    double mean() const noexcept { return mean_; }
    double second_moment() const noexcept { return second_moment_; }
    bool is_constant() const noexcept { return std::holds_alternative<ConstantWeight>(law_); }
    /// R ≡ 1, the standard IBP.
    bool is_unit() const noexcept { return is_constant() && mean_ == 1.0; }

    double sample(RngStream& rng) const;

    friend bool operator==(const WeightSpec& a, const WeightSpec& b) {
        return a.to_string() == b.to_string();
    }

private:
    Variant law_;
    double lower_ = 0.0;
    double upper_ = 0.0;
    double mean_ = 0.0;
    double second_moment_ = 0.0;
};

// ---------------------------------------------------------------------------
// Subsets of [0, 1]
// ---------------------------------------------------------------------------

/// Finite union of disjoint closed subintervals of [0, 1], kept sorted.
/// Intervals may share an endpoint; any positive-length overlap is rejected.
class IntervalSet {
public:
    IntervalSet() = default;
    explicit IntervalSet(std::vector<std::pair<double, double>> intervals);

    static IntervalSet whole() { return IntervalSet({{0.0, 1.0}}); }
    /// Parses "lo-hi" items separated by commas, e.g. "0-0.25,0.5-0.75";
    /// the empty string is the empty set.
    static IntervalSet parse(const std::string& text);
    std::string to_string() const;

    bool contains(double x) const noexcept;
    /// Lebesgue (= base-measure) mass of the set.
    double measure() const noexcept;
    bool empty() const noexcept { return intervals_.empty(); }
    const std::vector<std::pair<double, double>>& intervals() const noexcept { return intervals_; }

    friend bool operator==(const IntervalSet&, const IntervalSet&) = default;

private:
    std::vector<std::pair<double, double>> intervals_;
};

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

struct ModelParams {
    double alpha = 1.0;
    double beta = 0.5;
    double c = 1.0;
    WeightSpec weights = WeightSpec::constant(1.0);
    std::optional<IntervalSet> subset;
};

/// Which asymptotic results have their hypotheses met by a parameter set.
struct TheoremApplicability {
    bool model_valid = false;
    /// L_n / a_n(β) → λ(β): β in [0, 1) with i.i.d. bounded weights.
    bool slln_ok = false;
    /// CLT for L_n: additionally constant-mean weights, which every family here has.
    bool clt_ln_ok = false;
    /// CLT for K̄_n: β < 1/2 with bounded weights.
    bool clt_kbar_ok = false;
    /// CLT for K̄_n in the standard IBP: R ≡ 1 and β < 1.
    bool clt_kbar_standard_ok = false;
};

/// Throws InvalidParameters naming the violated inequality.
TheoremApplicability validate_params(const ModelParams& params);

/// Λ as a function of the cumulative weight W = Σ R_i.
///
///   Λ(W) = α Γ(c+1) Γ(c+β+W) / (Γ(c+β) Γ(c+1+W)),   Λ(0) = α.
///
/// The log-gamma difference is taken through log_gamma_ratio_excess so the
/// value keeps full relative precision for large W.
class LambdaCurve {
public:
    explicit LambdaCurve(const ModelParams& params);
    double operator()(double total_weight) const;

private:
    double alpha_;
    double beta_;
    double c_;
    long double log_prefactor_;  // ln α + ln Γ(c+1) − ln Γ(c+β)
};

double lambda_of(const ModelParams& params, double total_weight);

/// Constants of the bound Λ_n <= D / n^{1−β}.
struct LambdaBound {
    double sup_abs_h;     ///< sup |h(x)| over the grid x in [c+u, x_max]
    double sup_abs_x_h;   ///< sup |x h(x)| over the same grid
    double v;             ///< min(u, c + u)
    double d;             ///< α Γ(c+1)/Γ(c+β) (1 + sup|h|) / v^{1−β}
};

LambdaBound lambda_bound(const ModelParams& params, double x_max = 1e8, int grid_points = 4000);

// ---------------------------------------------------------------------------
// State machine
// ---------------------------------------------------------------------------

struct Dish {
    std::uint64_t dish_id;
    double label;
    double weighted_count;
    std::uint64_t first_customer;
};

struct CustomerOutcome {
    std::uint64_t customer = 0;
    std::uint64_t dishes_tried = 0;  ///< K
    std::uint64_t new_dishes = 0;    ///< N
    std::vector<std::uint64_t> repeat_dish_ids;
    std::vector<double> new_dish_labels;
    double weight = 0.0;  ///< R of this customer, drawn after the selections

    friend bool operator==(const CustomerOutcome&, const CustomerOutcome&) = default;
};

/// Markov state after n customers. Dishes are stored column-wise and indexed
/// by creation order, which is also their id.
class BuffetState {
public:
    static constexpr std::size_t kDefaultDishCap = 50'000'000;

    BuffetState(const ModelParams& params, RngStream rng, std::size_t dish_cap = kDefaultDishCap);

    std::uint64_t n() const noexcept { return n_; }
    double total_weight() const noexcept { return total_weight_; }
    double lambda() const noexcept { return lambda_; }
    std::uint64_t dish_count() const noexcept { return labels_.size(); }

    Dish dish(std::uint64_t id) const {
        return {id, labels_[id], weighted_counts_[id], first_customer_[id]};
    }
    std::span<const double> labels() const noexcept { return labels_; }
    std::span<const double> weighted_counts() const noexcept { return weighted_counts_; }

    /// Σ R_i K_i.
    double weighted_k_sum() const noexcept { return weighted_k_sum_.value(); }
    std::uint64_t sum_k() const noexcept { return sum_k_; }
    std::uint64_t sum_k_sq() const noexcept { return sum_k_sq_; }
    /// Compensated Σ R_i and Σ R_i², for the estimators.
    double sum_r() const noexcept { return sum_r_.value(); }
    double sum_r_sq() const noexcept { return sum_r_sq_.value(); }
    std::uint64_t last_k() const noexcept { return last_k_; }
    std::uint64_t last_n_new() const noexcept { return last_new_; }

    const RngStream& rng() const noexcept { return rng_; }
    /// Swap the random stream, e.g. to resample the next step of a frozen state.
    void reseed(RngStream rng) noexcept { rng_ = rng; }

    friend void step_into(BuffetState& state, const ModelParams& params, CustomerOutcome& out);

private:
    LambdaCurve curve_;
    RngStream rng_;
    std::size_t dish_cap_;

    std::uint64_t n_ = 0;
    double total_weight_ = 0.0;
    double lambda_;

    std::vector<double> labels_;
    std::vector<double> weighted_counts_;
    std::vector<std::uint64_t> first_customer_;

    KahanSum weighted_k_sum_;
    KahanSum sum_r_;
    KahanSum sum_r_sq_;
    std::uint64_t sum_k_ = 0;
    std::uint64_t sum_k_sq_ = 0;
    std::uint64_t last_k_ = 0;
    std::uint64_t last_new_ = 0;
};

/// (Σ R_i M_i{x} − β) / (Σ R_i + c) for an existing dish.
double inclusion_probability(const Dish& dish, const BuffetState& state, const ModelParams& params);

/// Advance by one customer, writing the outcome into `out` (buffers reused).
///
/// Draw order is fixed: one uniform per existing dish in id order, then the
/// Poisson count of new dishes, then their labels, then the weight.
void step_into(BuffetState& state, const ModelParams& params, CustomerOutcome& out);

CustomerOutcome step(BuffetState& state, const ModelParams& params);

}  // namespace wibp
