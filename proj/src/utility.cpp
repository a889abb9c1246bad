#include "deadline/utility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace deadline {

namespace {

constexpr double kNormTol = 1e-12;

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

}  // namespace

// ---------------------------------------------------------------------------
// MonotoneCubic

MonotoneCubic MonotoneCubic::fit(std::vector<double> x, std::vector<double> y) {
    if (x.size() != y.size() || x.size() < 2) fail("MonotoneCubic: need >= 2 matching nodes");
    for (std::size_t i = 1; i < x.size(); ++i) {
        if (!(x[i] > x[i - 1])) fail("MonotoneCubic: nodes must be strictly increasing");
        if (!(y[i] > y[i - 1])) fail("MonotoneCubic: values must be strictly increasing");
    }
    const std::size_t n = x.size();
    std::vector<double> h(n - 1), sec(n - 1), d(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x[i + 1] - x[i];
        sec[i] = (y[i + 1] - y[i]) / h[i];
    }
    d[0] = sec[0];
    d[n - 1] = sec[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        // Fritsch-Carlson weighted harmonic mean of adjacent secants.
        const double w1 = 2.0 * h[i] + h[i - 1];
        const double w2 = h[i] + 2.0 * h[i - 1];
        d[i] = (w1 + w2) / (w1 / sec[i - 1] + w2 / sec[i]);
    }
    // Monotonicity limiter.
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double cap = 3.0 * std::min(sec[i], i > 0 ? sec[i - 1] : sec[i]);
        d[i] = std::min(d[i], cap);
        d[i + 1] = std::min(d[i + 1], 3.0 * sec[i]);
    }
    MonotoneCubic m;
    m.x_ = std::move(x);
    m.y_ = std::move(y);
    m.d_ = std::move(d);
    return m;
}

std::size_t MonotoneCubic::segment(double t) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    std::size_t k = static_cast<std::size_t>(it - x_.begin());
    if (k == 0) return 0;
    if (k >= x_.size()) return x_.size() - 2;
    return k - 1;
}

double MonotoneCubic::eval(double t) const {
    const std::size_t k = segment(t);
    const double h = x_[k + 1] - x_[k];
    const double s = (t - x_[k]) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
    return h00 * y_[k] + h * h10 * d_[k] + h01 * y_[k + 1] + h * h11 * d_[k + 1];
}

double MonotoneCubic::deriv(double t) const {
    const std::size_t k = segment(t);
    const double h = x_[k + 1] - x_[k];
    const double s = (t - x_[k]) / h;
    const double s2 = s * s;
    const double g00 = 6 * s2 - 6 * s, g10 = 3 * s2 - 4 * s + 1;
    const double g01 = -6 * s2 + 6 * s, g11 = 3 * s2 - 2 * s;
    return (g00 * y_[k] + h * g10 * d_[k] + g01 * y_[k + 1] + h * g11 * d_[k + 1]) / h;
}

double MonotoneCubic::segment_integral(std::size_t k, double t) const {
    const double h = x_[k + 1] - x_[k];
    const double s = (t - x_[k]) / h;
    const double s2 = s * s, s3 = s2 * s, s4 = s2 * s2;
    // Antiderivatives of the Hermite basis on [0,1].
    const double H00 = 0.5 * s4 - s3 + s;
    const double H10 = 0.25 * s4 - (2.0 / 3.0) * s3 + 0.5 * s2;
    const double H01 = -0.5 * s4 + s3;
    const double H11 = 0.25 * s4 - s3 / 3.0;
    return h * (H00 * y_[k] + h * H10 * d_[k] + H01 * y_[k + 1] + h * H11 * d_[k + 1]);
}

double MonotoneCubic::integral(double a, double b) const {
    if (a > b) return -integral(b, a);
    const std::size_t ka = segment(a), kb = segment(b);
    if (ka == kb) return segment_integral(ka, b) - segment_integral(ka, a);
    double total = segment_integral(ka, x_[ka + 1]) - segment_integral(ka, a);
    for (std::size_t k = ka + 1; k < kb; ++k)
        total += segment_integral(k, x_[k + 1]);
    total += segment_integral(kb, b);
    return total;
}

// ---------------------------------------------------------------------------
// ZetaSpec

ZetaSpec ZetaSpec::power(double k) {
    if (!(k > 0)) fail("zeta power: exponent k must be > 0");
    ZetaSpec z;
    z.family_ = ZetaFamily::Power;
    z.param_ = k;
    return z;
}

ZetaSpec ZetaSpec::flipped_power(double p) {
    if (!(p >= 1)) fail("zeta flipped_power: exponent p must be >= 1");
    ZetaSpec z;
    z.family_ = ZetaFamily::FlippedPower;
    z.param_ = p;
    return z;
}

ZetaSpec ZetaSpec::tabulated(std::vector<double> theta, std::vector<double> value) {
    if (theta.empty() || std::abs(theta.front()) > kNormTol || std::abs(theta.back() - 1.0) > kNormTol)
        fail("zeta tabulated: theta grid must span [0, 1]");
    if (std::abs(value.front()) > kNormTol || std::abs(value.back() - 1.0) > kNormTol)
        fail("zeta tabulated: values must satisfy zeta(0)=0, zeta(1)=1");
    ZetaSpec z;
    z.family_ = ZetaFamily::Tabulated;
    z.table_ = MonotoneCubic::fit(std::move(theta), std::move(value));
    return z;
}

double ZetaSpec::operator()(double theta) const {
    if (theta < 0.0 || theta > 1.0) fail("zeta: theta outside [0, 1]");
    switch (family_) {
        case ZetaFamily::Power: return std::pow(theta, param_);
        case ZetaFamily::FlippedPower: return 1.0 - std::pow(1.0 - theta, param_);
        case ZetaFamily::Tabulated: return table_.eval(theta);
    }
    return 0.0;
}

double ZetaSpec::inverse(double v) const {
    if (v < 0.0 || v > 1.0) fail("zeta inverse: value outside [0, 1]");
    switch (family_) {
        case ZetaFamily::Power: return std::pow(v, 1.0 / param_);
        case ZetaFamily::FlippedPower: return 1.0 - std::pow(1.0 - v, 1.0 / param_);
        case ZetaFamily::Tabulated: break;
    }
    // Bisection bracket, then Newton polish on the interpolant.
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60 && hi - lo > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        (table_.eval(mid) < v ? lo : hi) = mid;
    }
    double t = 0.5 * (lo + hi);
    for (int it = 0; it < 4; ++it) {
        const double dz = table_.deriv(t);
        if (dz <= 0) break;
        t = std::clamp(t - (table_.eval(t) - v) / dz, 0.0, 1.0);
    }
    return t;
}

double ZetaSpec::antiderivative(double theta) const {
    switch (family_) {
        case ZetaFamily::Power: return std::pow(theta, param_ + 1.0) / (param_ + 1.0);
        case ZetaFamily::FlippedPower:
            return theta + (std::pow(1.0 - theta, param_ + 1.0) - 1.0) / (param_ + 1.0);
        case ZetaFamily::Tabulated: return table_.integral(0.0, theta);
    }
    return 0.0;
}

double ZetaSpec::deriv(double theta) const {
    switch (family_) {
        case ZetaFamily::Power: return param_ * std::pow(theta, param_ - 1.0);
        case ZetaFamily::FlippedPower: return param_ * std::pow(1.0 - theta, param_ - 1.0);
        case ZetaFamily::Tabulated: return table_.deriv(theta);
    }
    return 0.0;
}

double ZetaSpec::arrow_pratt(double theta) const {
    switch (family_) {
        case ZetaFamily::Power: return -(param_ - 1.0) / theta;
        case ZetaFamily::FlippedPower: return (param_ - 1.0) / (1.0 - theta);
        case ZetaFamily::Tabulated:
            throw std::runtime_error(
                "arrow_pratt: tabulated zeta is not twice differentiable; "
                "use a closed-form family for concavity comparisons");
    }
    return 0.0;
}

nlohmann::json ZetaSpec::to_json() const {
    switch (family_) {
        case ZetaFamily::Power: return {{"family", "power"}, {"k", param_}};
        case ZetaFamily::FlippedPower: return {{"family", "flipped_power"}, {"p", param_}};
        case ZetaFamily::Tabulated:
            return {{"family", "tabulated"},
                    {"theta", table_.nodes()},
                    {"value", table_.values()}};
    }
    return {};
}

ZetaSpec ZetaSpec::from_json(const nlohmann::json& j) {
    const std::string fam = j.at("family").get<std::string>();
    if (fam == "power") return power(j.at("k").get<double>());
    if (fam == "flipped_power") return flipped_power(j.at("p").get<double>());
    if (fam == "tabulated")
        return tabulated(j.at("theta").get<std::vector<double>>(),
                         j.at("value").get<std::vector<double>>());
    fail("zeta: unknown family '" + fam + "'");
}

// ---------------------------------------------------------------------------
// MuSpec

MuSpec MuSpec::power(double gamma, double scale) {
    if (!(gamma > 0.0 && gamma <= 1.0)) fail("mu power: gamma must be in (0, 1]");
    if (!(scale > 0.0)) fail("mu power: scale must be > 0");
    MuSpec m;
    m.family_ = MuFamily::Power;
    m.gamma_ = gamma;
    m.scale_ = scale;
    return m;
}

MuSpec MuSpec::table(std::vector<double> values) {
    if (values.size() < 2) fail("mu table: need mu(0) and mu(1) at least");
    if (std::abs(values.front()) > kNormTol) fail("mu table: mu(0) must be 0");
    MuSpec m;
    m.family_ = MuFamily::Table;
    m.values_ = std::move(values);
    return m;
}

double MuSpec::operator()(int x) const {
    if (x < 0) fail("mu: amount must be >= 0");
    if (family_ == MuFamily::Power) return scale_ * std::pow(static_cast<double>(x), gamma_);
    if (static_cast<std::size_t>(x) >= values_.size()) fail("mu table: amount exceeds table");
    return values_[static_cast<std::size_t>(x)];
}

int MuSpec::capacity() const {
    if (family_ == MuFamily::Power) return std::numeric_limits<int>::max();
    return static_cast<int>(values_.size()) - 1;
}

MuSpec MuSpec::scaled(double k) const {
    if (!(k > 0.0)) fail("mu scaled: factor must be > 0");
    MuSpec m = *this;
    if (family_ == MuFamily::Power) {
        m.scale_ *= k;
    } else {
        for (double& v : m.values_) v *= k;
    }
    return m;
}

void MuSpec::validate_for(int n) const {
    if (n < 1) fail("mu: resource count n must be >= 1");
    if (n > capacity()) fail("mu table: resource count n exceeds table capacity");
    double prev_delta = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double d = delta(i);
        if (!(d > 0.0)) fail("mu: increments must be strictly positive");
        if (n > 1 && !(d < prev_delta)) fail("mu: must be strictly concave when n > 1");
        prev_delta = d;
    }
}

nlohmann::json MuSpec::to_json() const {
    if (family_ == MuFamily::Power) {
        nlohmann::json j = {{"family", "power"}, {"gamma", gamma_}};
        if (scale_ != 1.0) j["scale"] = scale_;
        return j;
    }
    return {{"family", "table"}, {"values", values_}};
}

MuSpec MuSpec::from_json(const nlohmann::json& j) {
    const std::string fam = j.at("family").get<std::string>();
    if (fam == "power") return power(j.at("gamma").get<double>(), j.value("scale", 1.0));
    if (fam == "table") return table(j.at("values").get<std::vector<double>>());
    fail("mu: unknown family '" + fam + "'");
}

// ---------------------------------------------------------------------------
// UtilitySpec and free operations

void UtilitySpec::validate(int n) const {
    mu.validate_for(n);
    if (std::abs(zeta(0.0)) > kNormTol) fail("zeta(0) must be 0");
    if (std::abs(zeta(1.0) - 1.0) > kNormTol) fail("zeta(1) must be 1");
    double prev = 0.0;
    for (int i = 1; i <= 64; ++i) {
        const double z = zeta(i / 64.0);
        if (!(z > prev)) fail("zeta must be strictly increasing");
        prev = z;
    }
}

nlohmann::json UtilitySpec::to_json() const {
    return {{"zeta", zeta.to_json()}, {"mu", mu.to_json()}};
}

UtilitySpec UtilitySpec::from_json(const nlohmann::json& j) {
    return {ZetaSpec::from_json(j.at("zeta")), MuSpec::from_json(j.at("mu"))};
}

double eval_u(const UtilitySpec& spec, double theta, int amount) {
    if (theta < 0.0 || theta > 1.0) fail("eval_u: theta outside [0, 1]");
    if (amount < 0) fail("eval_u: amount must be >= 0");
    if (theta == 0.0 || amount == 0) return 0.0;
    return spec.zeta(theta) * spec.mu(amount);
}

double zeta_inverse(const UtilitySpec& spec, double v) { return spec.zeta.inverse(v); }

bool is_more_concave(const UtilitySpec& a, const UtilitySpec& b, int grid) {
    if (grid < 2) fail("is_more_concave: grid must be >= 2");
    if (!a.zeta.twice_differentiable() || !b.zeta.twice_differentiable())
        throw std::runtime_error(
            "is_more_concave: tabulated zeta is not twice differentiable");
    for (int i = 1; i < grid; ++i) {
        const double theta = static_cast<double>(i) / grid;
        if (!(b.zeta.arrow_pratt(theta) > a.zeta.arrow_pratt(theta))) return false;
    }
    return true;
}

bool is_log_concave_zeta(const UtilitySpec& spec, int grid) {
    if (grid < 2) fail("is_log_concave_zeta: grid must be >= 2");
    if (spec.zeta.family() == ZetaFamily::Power) return true;  // (log z)'' = -k/theta^2
    const double h = 1e-5;
    for (int i = 1; i < grid; ++i) {
        const double theta = static_cast<double>(i) / grid;
        const double lo = std::max(theta - h, h / 2), hi = std::min(theta + h, 1.0);
        const double mid = 0.5 * (lo + hi), step = 0.5 * (hi - lo);
        const double d2 = (std::log(spec.zeta(mid + step)) - 2.0 * std::log(spec.zeta(mid)) +
                           std::log(spec.zeta(mid - step))) /
                          (step * step);
        if (!(d2 < 0.0)) return false;
    }
    return true;
}

}  // namespace deadline
