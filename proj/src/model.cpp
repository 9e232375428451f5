#include "wibp/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wibp/error.hpp"
#include "wibp/format.hpp"
#include "wibp/numerics.hpp"

namespace wibp {

namespace {

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

// ---------------------------------------------------------------------------
// WeightSpec
// ---------------------------------------------------------------------------

WeightSpec::WeightSpec(Variant law) : law_(law) {
    std::visit(
        [this](const auto& w) {
            using T = std::decay_t<decltype(w)>;
            if constexpr (std::is_same_v<T, ConstantWeight>) {
                if (!finite_positive(w.value))
                    throw InvalidParameters("constant weight must satisfy r > 0");
                lower_ = upper_ = mean_ = w.value;
                second_moment_ = w.value * w.value;
            } else if constexpr (std::is_same_v<T, UniformWeight>) {
                if (!finite_positive(w.lower) || !std::isfinite(w.upper) || !(w.lower < w.upper))
                    throw InvalidParameters("uniform weights must satisfy 0 < u < b < inf");
                lower_ = w.lower;
                upper_ = w.upper;
                mean_ = 0.5 * (w.lower + w.upper);
                second_moment_ =
                    (w.lower * w.lower + w.lower * w.upper + w.upper * w.upper) / 3.0;
            } else {
                if (!finite_positive(w.first) || !finite_positive(w.second))
                    throw InvalidParameters("two-point weights must satisfy v1 > 0 and v2 > 0");
                if (!(w.p_first >= 0.0 && w.p_first <= 1.0))
                    throw InvalidParameters("two-point weights must satisfy 0 <= p <= 1");
                lower_ = std::min(w.first, w.second);
                upper_ = std::max(w.first, w.second);
                mean_ = w.p_first * w.first + (1.0 - w.p_first) * w.second;
                second_moment_ =
                    w.p_first * w.first * w.first + (1.0 - w.p_first) * w.second * w.second;
            }
        },
        law_);
}

WeightSpec WeightSpec::parse(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw ConfigError("weights: expected const:r | unif:u,b | twopoint:v1,v2,p, got '" +
                          text + "'");
    const std::string kind(trim(std::string_view(text).substr(0, colon)));
    const auto args = split(std::string_view(text).substr(colon + 1), ',');
    auto expect = [&](std::size_t count) {
        if (args.size() != count)
            throw ConfigError("weights: '" + kind + "' takes " + std::to_string(count) +
                              " argument(s), got '" + text + "'");
    };
    if (kind == "const") {
        expect(1);
        return constant(parse_double(args[0], "weights"));
    }
    if (kind == "unif") {
        expect(2);
        return uniform(parse_double(args[0], "weights"), parse_double(args[1], "weights"));
    }
    if (kind == "twopoint") {
        expect(3);
        return two_point(parse_double(args[0], "weights"), parse_double(args[1], "weights"),
                         parse_double(args[2], "weights"));
    }
    throw ConfigError("weights: unknown law '" + kind + "'");
}

std::string WeightSpec::to_string() const {
    return std::visit(
        [](const auto& w) -> std::string {
            using T = std::decay_t<decltype(w)>;
            if constexpr (std::is_same_v<T, ConstantWeight>) {
                return "const:" + format_shortest(w.value);
            } else if constexpr (std::is_same_v<T, UniformWeight>) {
                return "unif:" + format_shortest(w.lower) + "," + format_shortest(w.upper);
            } else {
                return "twopoint:" + format_shortest(w.first) + "," + format_shortest(w.second) +
                       "," + format_shortest(w.p_first);
            }
        },
        law_);
}

double WeightSpec::sample(RngStream& rng) const {
    return std::visit(
        [&rng](const auto& w) -> double {
            using T = std::decay_t<decltype(w)>;
            if constexpr (std::is_same_v<T, ConstantWeight>) {
                return w.value;
            } else if constexpr (std::is_same_v<T, UniformWeight>) {
                return w.lower + (w.upper - w.lower) * rng.uniform();
            } else {
                return rng.uniform() < w.p_first ? w.first : w.second;
            }
        },
        law_);
}

// ---------------------------------------------------------------------------
// IntervalSet
// ---------------------------------------------------------------------------

IntervalSet::IntervalSet(std::vector<std::pair<double, double>> intervals)
    : intervals_(std::move(intervals)) {
    for (const auto& [lo, hi] : intervals_) {
        if (!(lo >= 0.0 && hi <= 1.0 && lo <= hi))
            throw InvalidSubset("subset intervals must satisfy 0 <= lo <= hi <= 1");
    }
    std::sort(intervals_.begin(), intervals_.end());
    for (std::size_t i = 1; i < intervals_.size(); ++i) {
        if (intervals_[i].first < intervals_[i - 1].second)
            throw InvalidSubset("subset intervals overlap");
    }
}

IntervalSet IntervalSet::parse(const std::string& text) {
    if (trim(text).empty()) return {};
    std::vector<std::pair<double, double>> intervals;
    for (const auto& item : split(text, ',')) {
        // The separator is the first '-' after the leading character, so
        // "0-0.5" splits cleanly.
        const auto dash = item.find('-', 1);
        if (dash == std::string::npos)
            throw ConfigError("subset: expected intervals lo-hi, got '" + item + "'");
        intervals.emplace_back(parse_double(item.substr(0, dash), "subset"),
                               parse_double(item.substr(dash + 1), "subset"));
    }
    return IntervalSet(std::move(intervals));
}

std::string IntervalSet::to_string() const {
    std::string out;
    for (const auto& [lo, hi] : intervals_) {
        if (!out.empty()) out += ',';
        out += format_shortest(lo) + "-" + format_shortest(hi);
    }
    return out;
}

bool IntervalSet::contains(double x) const noexcept {
    return std::any_of(intervals_.begin(), intervals_.end(),
                       [x](const auto& iv) { return iv.first <= x && x <= iv.second; });
}

double IntervalSet::measure() const noexcept {
    double total = 0.0;
    for (const auto& [lo, hi] : intervals_) total += hi - lo;
    return total;
}

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

TheoremApplicability validate_params(const ModelParams& p) {
    if (!finite_positive(p.alpha)) throw InvalidParameters("alpha must satisfy alpha > 0");
    if (!(std::isfinite(p.beta) && p.beta < 1.0))
        throw InvalidParameters("beta must satisfy beta < 1");
    if (!(std::isfinite(p.c) && p.c > -p.beta))
        throw InvalidParameters("c must satisfy c > -beta");
    const double u = p.weights.lower_bound();
    if (!(u > std::max(p.beta, 0.0)))
        throw InvalidParameters("weights lower bound u must satisfy u > max(beta, 0)");

    TheoremApplicability flags;
    flags.model_valid = true;
    const bool beta_in_unit = p.beta >= 0.0 && p.beta < 1.0;
    // Every weight family here is i.i.d., bounded, with constant mean.
    flags.slln_ok = beta_in_unit;
    flags.clt_ln_ok = beta_in_unit;
    flags.clt_kbar_ok = p.beta < 0.5;
    flags.clt_kbar_standard_ok = p.weights.is_unit() && p.beta < 1.0;
    return flags;
}

LambdaCurve::LambdaCurve(const ModelParams& params)
    : alpha_(params.alpha),
      beta_(params.beta),
      c_(params.c),
      log_prefactor_(std::log(static_cast<long double>(params.alpha)) +
                     log_gamma_ext(params.c + 1.0L) - log_gamma_ext(params.c + params.beta)) {}

double LambdaCurve::operator()(double total_weight) const {
    if (total_weight == 0.0) return alpha_;
    const long double x = static_cast<long double>(c_) + total_weight;
    if (!(x > 0.0L)) {
        // Only reachable for c < 0 and W below the weight floor.
        return static_cast<double>(std::exp(log_prefactor_ + log_gamma_ext(x + beta_) -
                                            log_gamma_ext(x + 1.0L)));
    }
    const long double log_lambda = log_prefactor_ + (beta_ - 1.0L) * std::log(x) +
                                   log_gamma_ratio_excess(x, beta_, 1.0L);
    return static_cast<double>(std::exp(log_lambda));
}

double lambda_of(const ModelParams& params, double total_weight) {
    if (!(total_weight >= 0.0)) throw DomainError("lambda_of requires W >= 0");
    return LambdaCurve(params)(total_weight);
}

LambdaBound lambda_bound(const ModelParams& params, double x_max, int grid_points) {
    validate_params(params);
    const double u = params.weights.lower_bound();
    const double x0 = params.c + u;
    LambdaBound out{};
    out.v = std::min(u, x0);
    const double log_lo = std::log(x0);
    const double log_hi = std::log(std::max(x_max, x0));
    for (int i = 0; i < grid_points; ++i) {
        const double t = grid_points == 1 ? 0.0 : static_cast<double>(i) / (grid_points - 1);
        const double x = i == 0 ? x0 : std::exp(log_lo + t * (log_hi - log_lo));
        const double h = h_of(x, params.beta);
        out.sup_abs_h = std::max(out.sup_abs_h, std::fabs(h));
        out.sup_abs_x_h = std::max(out.sup_abs_x_h, std::fabs(x * h));
    }
    const double gamma_ratio =
        std::exp(log_gamma(params.c + 1.0) - log_gamma(params.c + params.beta));
    out.d = params.alpha * gamma_ratio * (1.0 + out.sup_abs_h) /
            std::pow(out.v, 1.0 - params.beta);
    return out;
}

// ---------------------------------------------------------------------------
// State machine
// ---------------------------------------------------------------------------

BuffetState::BuffetState(const ModelParams& params, RngStream rng, std::size_t dish_cap)
    : curve_((validate_params(params), params)),
      rng_(rng),
      dish_cap_(dish_cap),
      lambda_(params.alpha) {}

double inclusion_probability(const Dish& dish, const BuffetState& state,
                             const ModelParams& params) {
    return (dish.weighted_count - params.beta) / (state.total_weight() + params.c);
}

void step_into(BuffetState& s, const ModelParams& params, CustomerOutcome& out) {
    out.customer = s.n_ + 1;
    out.repeat_dish_ids.clear();
    out.new_dish_labels.clear();

    // u < (w − β)/(W + c)  <=>  u (W + c) < w − β, since W + c > 0 once a dish exists.
    const double denom = s.total_weight_ + params.c;
    const double beta = params.beta;
    const std::size_t existing = s.labels_.size();
    const double* counts = s.weighted_counts_.data();
    for (std::size_t i = 0; i < existing; ++i) {
        if (s.rng_.uniform() * denom < counts[i] - beta) out.repeat_dish_ids.push_back(i);
    }

    const std::uint64_t fresh = poisson_sample(s.lambda_, s.rng_);
    if (fresh > s.dish_cap_ - existing)
        throw ResourceError("dish table cap of " + std::to_string(s.dish_cap_) +
                            " exceeded at customer " + std::to_string(out.customer));
    for (std::uint64_t j = 0; j < fresh; ++j) out.new_dish_labels.push_back(s.rng_.uniform());

    const double r = params.weights.sample(s.rng_);
    out.weight = r;
    out.new_dishes = fresh;
    out.dishes_tried = out.repeat_dish_ids.size() + fresh;

    s.total_weight_ += r;
    for (const auto id : out.repeat_dish_ids) s.weighted_counts_[id] += r;
    for (const double label : out.new_dish_labels) {
        s.labels_.push_back(label);
        s.weighted_counts_.push_back(r);
        s.first_customer_.push_back(out.customer);
    }

    const std::uint64_t k = out.dishes_tried;
    s.weighted_k_sum_ += r * static_cast<double>(k);
    s.sum_k_ += k;
    s.sum_k_sq_ += k * k;
    s.sum_r_ += r;
    s.sum_r_sq_ += r * r;
    s.last_k_ = k;
    s.last_new_ = fresh;
    s.n_ = out.customer;
    s.lambda_ = s.curve_(s.total_weight_);
}

CustomerOutcome step(BuffetState& state, const ModelParams& params) {
    CustomerOutcome out;
    step_into(state, params, out);
    return out;
}

}  // namespace wibp
