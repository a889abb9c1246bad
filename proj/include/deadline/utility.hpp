#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace deadline {

/// Monotone piecewise-cubic interpolant (Fritsch-Carlson slopes).
/// Strictly increasing data yields a strictly increasing interpolant,
/// and segments are cubic polynomials so the antiderivative is exact.
class MonotoneCubic {
public:
    MonotoneCubic() = default;
    static MonotoneCubic fit(std::vector<double> x, std::vector<double> y);

    double eval(double t) const;
    double deriv(double t) const;
    /// Exact integral of the interpolant over [a, b].
    double integral(double a, double b) const;

    double x_front() const { return x_.front(); }
    double x_back() const { return x_.back(); }
    const std::vector<double>& nodes() const { return x_; }
    const std::vector<double>& values() const { return y_; }

private:
    std::size_t segment(double t) const;
    /// Integral from x_[k] to t within segment k.
    double segment_integral(std::size_t k, double t) const;

    std::vector<double> x_, y_, d_;
};

enum class ZetaFamily { Power, FlippedPower, Tabulated };

/// Quality component of the utility, normalized to zeta(0)=0, zeta(1)=1,
/// strictly increasing on [0,1].
class ZetaSpec {
public:
    static ZetaSpec power(double k);
    static ZetaSpec flipped_power(double p);  // 1 - (1-theta)^p
    static ZetaSpec tabulated(std::vector<double> theta, std::vector<double> value);

    double operator()(double theta) const;
    double inverse(double v) const;        // abs tolerance 1e-12
    double antiderivative(double theta) const;  // Z(theta) with Z(0)=0
    double deriv(double theta) const;
    /// Arrow-Pratt coefficient -zeta''/zeta'. Closed-form families only.
    double arrow_pratt(double theta) const;
    bool twice_differentiable() const { return family_ != ZetaFamily::Tabulated; }

    ZetaFamily family() const { return family_; }
    double param() const { return param_; }

    nlohmann::json to_json() const;
    static ZetaSpec from_json(const nlohmann::json& j);

private:
    ZetaFamily family_ = ZetaFamily::Power;
    double param_ = 1.0;
    MonotoneCubic table_;
};

enum class MuFamily { Power, Table };

/// Quantity component of the utility over integer resource amounts.
/// mu(0)=0, strictly increasing, strictly discrete-concave when the
/// stock has more than one unit.
class MuSpec {
public:
    static MuSpec power(double gamma, double scale = 1.0);  // scale * x^gamma
    static MuSpec table(std::vector<double> values);        // mu(0..m)

    double operator()(int x) const;
    double delta(int i) const { return (*this)(i + 1) - (*this)(i); }
    /// Largest representable amount (INT_MAX for the power family).
    int capacity() const;
    /// Copy with utility multiplied by k.
    MuSpec scaled(double k) const;
    void validate_for(int n) const;

    MuFamily family() const { return family_; }
    double gamma() const { return gamma_; }
    double scale() const { return scale_; }

    nlohmann::json to_json() const;
    static MuSpec from_json(const nlohmann::json& j);

private:
    MuFamily family_ = MuFamily::Power;
    double gamma_ = 1.0;
    double scale_ = 1.0;
    std::vector<double> values_;
};

/// Separable instantaneous utility u(theta, x) = zeta(theta) * mu(x).
struct UtilitySpec {
    ZetaSpec zeta;
    MuSpec mu;

    void validate(int n) const;
    UtilitySpec scaled(double k) const { return {zeta, mu.scaled(k)}; }

    nlohmann::json to_json() const;
    static UtilitySpec from_json(const nlohmann::json& j);
};

double eval_u(const UtilitySpec& spec, double theta, int amount);
double zeta_inverse(const UtilitySpec& spec, double v);

/// True iff b's zeta is strictly more concave than a's: the Arrow-Pratt
/// coefficient of b exceeds a's at every interior point theta = i/grid.
bool is_more_concave(const UtilitySpec& a, const UtilitySpec& b, int grid);

/// True iff (log zeta)'' < 0 at every interior point theta = i/grid.
bool is_log_concave_zeta(const UtilitySpec& spec, int grid);

}  // namespace deadline
