#include "mflab/interaction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mflab/radial.hpp"

namespace mflab {

namespace {

bool same_sign(const std::vector<GaussianTerm>& terms) {
  bool pos = false, neg = false;
  for (const auto& t : terms) {
    if (t.amplitude > 0) pos = true;
    if (t.amplitude < 0) neg = true;
  }
  return !(pos && neg);
}

double gaussian_sum(const std::vector<GaussianTerm>& terms, double r) {
  double v = 0.0;
  for (const auto& t : terms) v += t.amplitude * std::exp(-r * r / (2.0 * t.width * t.width));
  return v;
}

}  // namespace

InteractionPotential InteractionPotential::from_terms_(int dim, std::vector<GaussianTerm> terms,
                                                       std::string description) {
  if (dim < 1 || dim > 3) throw Error(ErrorCode::InvalidArgument, "interaction dimension must be 1, 2 or 3");
  for (const auto& t : terms) {
    if (!(t.width > 0.0) || !std::isfinite(t.amplitude))
      throw Error(ErrorCode::InvalidArgument, "Gaussian terms need a finite amplitude and positive width");
  }
  terms.erase(std::remove_if(terms.begin(), terms.end(), [](const GaussianTerm& t) { return t.amplitude == 0.0; }),
              terms.end());
  InteractionPotential w;
  w.dim_ = dim;
  w.zero_ = terms.empty();
  w.terms_ = terms;
  w.radial_ = [terms](double r) { return gaussian_sum(terms, r); };
  if (terms.empty()) {
    w.width_ = 1.0;
    w.range_ = 0.0;
  } else {
    double wmin = terms.front().width, wmax = wmin;
    for (const auto& t : terms) {
      wmin = std::min(wmin, t.width);
      wmax = std::max(wmax, t.width);
    }
    w.width_ = wmin;
    w.range_ = 9.0 * wmax;
  }
  w.description_ = std::move(description);
  w.compute_integrals_();
  return w;
}

InteractionPotential InteractionPotential::from_function_(int dim, std::function<double(double)> f, double width,
                                                          double range, std::string description) {
  InteractionPotential w;
  w.dim_ = dim;
  w.radial_ = std::move(f);
  w.width_ = width;
  w.range_ = range;
  w.description_ = std::move(description);
  w.compute_integrals_();
  w.zero_ = w.sup_ == 0.0;
  return w;
}

void InteractionPotential::compute_integrals_() {
  if (range_ <= 0.0) {
    integral_ = abs_integral_ = neg_integral_ = moment_ = sup_ = 0.0;
    return;
  }
  const auto& f = radial_;
  const int intervals = 40000;
  if (terms_) {
    integral_ = 0.0;
    for (const auto& t : *terms_) integral_ += t.amplitude * std::pow(2.0 * std::numbers::pi * t.width * t.width, dim_ / 2.0);
  } else {
    integral_ = radial::integral(dim_, f, range_, intervals);
  }
  if (terms_ && same_sign(*terms_)) {
    abs_integral_ = std::abs(integral_);
  } else {
    abs_integral_ = radial::integral(dim_, [&](double r) { return std::abs(f(r)); }, range_, intervals);
  }
  neg_integral_ = 0.5 * (abs_integral_ - integral_);
  moment_ = radial::integral(dim_, [&](double r) { return r * std::abs(f(r)); }, range_, intervals);
  sup_ = 0.0;
  const int samples = 20000;
  for (int i = 0; i <= samples; ++i) sup_ = std::max(sup_, std::abs(f(range_ * i / samples)));
}

InteractionPotential InteractionPotential::zero(int dim) {
  auto w = from_terms_(dim, {}, "zero");
  w.spec_ = {{"profile", "zero"}};
  return w;
}

InteractionPotential InteractionPotential::gaussians(int dim, std::vector<GaussianTerm> terms) {
  std::ostringstream os;
  os << "gaussians[";
  nlohmann::json jt = nlohmann::json::array();
  for (std::size_t i = 0; i < terms.size(); ++i) {
    os << (i ? ", " : "") << terms[i].amplitude << "@" << terms[i].width;
    jt.push_back({{"amplitude", terms[i].amplitude}, {"width", terms[i].width}});
  }
  os << "]";
  auto w = from_terms_(dim, std::move(terms), os.str());
  w.spec_ = {{"profile", "gaussian"}, {"terms", jt}};
  return w;
}

InteractionPotential InteractionPotential::bump(int dim, double amplitude, double radius) {
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "bump radius must be positive");
  auto f = [amplitude, radius](double r) {
    const double t = r / radius;
    if (t >= 1.0) return 0.0;
    return amplitude * std::exp(1.0 - 1.0 / (1.0 - t * t));
  };
  std::ostringstream os;
  os << "bump[" << amplitude << "@" << radius << "]";
  auto w = from_function_(dim, f, radius / 3.0, radius, os.str());
  w.spec_ = {{"profile", "bump"}, {"amplitude", amplitude}, {"radius", radius}};
  return w;
}

InteractionPotential InteractionPotential::tabulated(int dim, std::vector<double> radii, std::vector<double> values) {
  if (radii.size() != values.size() || radii.size() < 2)
    throw Error(ErrorCode::InvalidArgument, "tabulated potential needs matching radii/values with >= 2 nodes");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!std::isfinite(values[i])) throw Error(ErrorCode::InvalidArgument, "tabulated values must be finite");
    if (i && !(radii[i] > radii[i - 1])) throw Error(ErrorCode::InvalidArgument, "tabulated radii must increase");
  }
  if (radii.front() != 0.0) throw Error(ErrorCode::InvalidArgument, "tabulated radii must start at 0");
  nlohmann::json spec = {{"profile", "tabulated"}, {"radii", radii}, {"values", values}};
  const double range = radii.back();
  auto f = [radii = std::move(radii), values = std::move(values)](double r) {
    if (r >= radii.back()) return 0.0;
    auto it = std::upper_bound(radii.begin(), radii.end(), r);
    const std::size_t i = static_cast<std::size_t>(it - radii.begin()) - 1;
    const double t = (r - radii[i]) / (radii[i + 1] - radii[i]);
    return (1.0 - t) * values[i] + t * values[i + 1];
  };
  auto w = from_function_(dim, f, range / 4.0, range, "tabulated");
  w.spec_ = spec;
  return w;
}

bool InteractionPotential::nonnegative() const {
  if (terms_) {
    if (same_sign(*terms_)) return terms_->empty() || terms_->front().amplitude > 0;
  }
  if (range_ <= 0.0) return true;
  const int samples = 20000;
  for (int i = 0; i <= samples; ++i)
    if (radial_(range_ * i / samples) < 0.0) return false;
  return true;
}

InteractionPotential InteractionPotential::scaled(double n, double beta) const {
  if (!(n >= 1.0)) throw Error(ErrorCode::InvalidArgument, "particle number must be >= 1");
  if (beta < 0.0 || beta >= 1.0) throw Error(ErrorCode::InvalidArgument, "beta must lie in [0, 1)");
  const double s = std::pow(n, beta);
  const double amp = std::pow(s, dim_);
  InteractionPotential w;
  w.dim_ = dim_;
  w.zero_ = zero_;
  if (terms_) {
    std::vector<GaussianTerm> t = *terms_;
    for (auto& g : t) {
      g.amplitude *= amp;
      g.width /= s;
    }
    w.terms_ = t;
    w.radial_ = [t](double r) { return gaussian_sum(t, r); };
  } else {
    auto base = radial_;
    w.radial_ = [base, s, amp](double r) { return amp * base(s * r); };
  }
  // change of variables: integrals are exact, not recomputed
  w.width_ = width_ / s;
  w.range_ = range_ / s;
  w.integral_ = integral_;
  w.abs_integral_ = abs_integral_;
  w.neg_integral_ = neg_integral_;
  w.moment_ = moment_ / s;
  w.sup_ = sup_ * amp;
  std::ostringstream os;
  os << description_ << " scaled(N=" << n << ", beta=" << beta << ")";
  w.description_ = os.str();
  w.spec_ = spec_;
  return w;
}

InteractionPotential InteractionPotential::modified(double eta) const {
  std::ostringstream os;
  os << description_ << " - " << eta << "|w|";
  if (terms_ && same_sign(*terms_)) {
    std::vector<GaussianTerm> t = *terms_;
    for (auto& g : t) g.amplitude *= (g.amplitude > 0) ? (1.0 - eta) : (1.0 + eta);
    auto w = from_terms_(dim_, std::move(t), os.str());
    w.spec_ = spec_;
    return w;
  }
  auto base = radial_;
  auto w = from_function_(dim_, [base, eta](double r) {
    const double v = base(r);
    return v - eta * std::abs(v);
  }, width_, range_, os.str());
  w.spec_ = spec_;
  return w;
}

InteractionPotential InteractionPotential::absolute() const {
  if (terms_ && same_sign(*terms_)) {
    std::vector<GaussianTerm> t = *terms_;
    for (auto& g : t) g.amplitude = std::abs(g.amplitude);
    auto w = from_terms_(dim_, std::move(t), "|" + description_ + "|");
    w.spec_ = spec_;
    return w;
  }
  auto base = radial_;
  auto w = from_function_(dim_, [base](double r) { return std::abs(base(r)); }, width_, range_,
                          "|" + description_ + "|");
  w.spec_ = spec_;
  return w;
}

nlohmann::json InteractionPotential::to_json() const {
  nlohmann::json j = spec_;
  j["dimension"] = dim_;
  j["integral"] = integral_;
  j["abs_integral"] = abs_integral_;
  j["negative_integral"] = neg_integral_;
  j["first_abs_moment"] = moment_;
  j["sup_abs"] = sup_;
  return j;
}

InteractionPotential InteractionPotential::from_json(int dim, const nlohmann::json& j) {
  const std::string profile = j.at("profile").get<std::string>();
  if (profile == "zero") return zero(dim);
  if (profile == "gaussian") {
    std::vector<GaussianTerm> terms;
    if (!j.contains("terms")) return gaussian(dim, j.at("amplitude").get<double>(), j.at("width").get<double>());
    for (const auto& t : j.at("terms")) terms.push_back({t.at("amplitude").get<double>(), t.at("width").get<double>()});
    return gaussians(dim, std::move(terms));
  }
  if (profile == "bump") return bump(dim, j.at("amplitude").get<double>(), j.at("radius").get<double>());
  if (profile == "tabulated")
    return tabulated(dim, j.at("radii").get<std::vector<double>>(), j.at("values").get<std::vector<double>>());
  throw Error(ErrorCode::Config, "unknown interaction profile '" + profile + "'");
}

double ScaledPotential::scale() const { return std::pow(n, beta); }

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Stable: return "STABLE";
    case Verdict::StableUpToSearch: return "STABLE-UP-TO-SEARCH";
    case Verdict::Unstable: return "UNSTABLE";
    case Verdict::Borderline: return "BORDERLINE";
  }
  return "?";
}

}  // namespace mflab
