#include "pks/entropy.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace pks {

DomainError::DomainError(const std::string& what, double value, std::size_t index)
    : std::domain_error([&] {
        std::ostringstream os;
        os << what << ": density " << value << " outside the admissible interval";
        if (index != npos) os << " at cell " << index;
        return os.str();
      }()),
      value_(value),
      index_(index) {}

EntropyModel EntropyModel::classical() { return {Kind::Classical, 0.0}; }

EntropyModel EntropyModel::bounded_mobility(double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa))
    throw std::invalid_argument("bounded mobility: kappa must be positive");
  return {Kind::BoundedMobility, kappa};
}

EntropyModel EntropyModel::saturation(double max_density) {
  if (!(max_density > 0.0) || !std::isfinite(max_density))
    throw std::invalid_argument("saturation: M must be positive");
  return {Kind::Saturation, max_density};
}

EntropyModel EntropyModel::parse(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  if (text == "classical") return classical();
  const auto open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')')
    throw std::invalid_argument("unknown entropy model '" + std::string(text) + "'");
  const auto name = trim(text.substr(0, open));
  const std::string arg(trim(text.substr(open + 1, text.size() - open - 2)));
  char* end = nullptr;
  const double value = std::strtod(arg.c_str(), &end);
  if (arg.empty() || *end != '\0')
    throw std::invalid_argument("entropy model parameter is not a number: '" + arg + "'");
  if (name == "bounded") return bounded_mobility(value);
  if (name == "saturation") return saturation(value);
  throw std::invalid_argument("unknown entropy model '" + std::string(name) + "'");
}

double EntropyModel::upper_bound() const {
  return kind_ == Kind::Saturation ? param_ : std::numeric_limits<double>::infinity();
}

bool EntropyModel::admissible(double rho) const { return rho > 0.0 && rho < upper_bound(); }

std::string EntropyModel::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Classical: os << "classical"; break;
    case Kind::BoundedMobility: os << "bounded(" << param_ << ")"; break;
    case Kind::Saturation: os << "saturation(" << param_ << ")"; break;
  }
  return os.str();
}

void EntropyModel::check(double rho) const {
  if (!admissible(rho)) throw DomainError("entropy model " + describe(), rho);
}

double EntropyModel::f(double rho) const {
  check(rho);
  switch (kind_) {
    case Kind::Classical: return rho * (std::log(rho) - 1.0);
    case Kind::BoundedMobility: return rho * (std::log(rho) - 1.0) + 0.5 * param_ * rho * rho;
    case Kind::Saturation: return rho * std::log(rho) + (param_ - rho) * std::log1p(-rho / param_);
  }
  return 0.0;
}

double EntropyModel::f1(double rho) const {
  check(rho);
  switch (kind_) {
    case Kind::Classical: return std::log(rho);
    case Kind::BoundedMobility: return std::log(rho) + param_ * rho;
    case Kind::Saturation: return std::log(rho) - std::log1p(-rho / param_);
  }
  return 0.0;
}

double EntropyModel::f2(double rho) const {
  check(rho);
  switch (kind_) {
    case Kind::Classical: return 1.0 / rho;
    case Kind::BoundedMobility: return 1.0 / rho + param_;
    case Kind::Saturation: return 1.0 / rho + 1.0 / (param_ - rho);
  }
  return 0.0;
}

double EntropyModel::f3(double rho) const {
  check(rho);
  switch (kind_) {
    case Kind::Classical:
    case Kind::BoundedMobility: return -1.0 / (rho * rho);
    case Kind::Saturation: {
      const double u = param_ - rho;
      return -1.0 / (rho * rho) + 1.0 / (u * u);
    }
  }
  return 0.0;
}

double EntropyModel::f4(double rho) const {
  check(rho);
  switch (kind_) {
    case Kind::Classical:
    case Kind::BoundedMobility: return 2.0 / (rho * rho * rho);
    case Kind::Saturation: {
      const double u = param_ - rho;
      return 2.0 / (rho * rho * rho) + 2.0 / (u * u * u);
    }
  }
  return 0.0;
}

double EntropyModel::mobility(double rho) const {
  check(rho);
  switch (kind_) {
    case Kind::Classical: return rho;
    case Kind::BoundedMobility: return rho / (param_ * rho + 1.0);
    case Kind::Saturation: return rho * (1.0 - rho / param_);
  }
  return 0.0;
}

// ---------------------------------------------------------------------------

double s_half(double rho_new, double rho_old, const EntropyModel& model) {
  if (!model.admissible(rho_old)) throw DomainError("s_half (old density)", rho_old);
  const double d = rho_new - rho_old;
  return model.f1(rho_new) - 0.5 * model.f2(rho_new) * d + model.f3(rho_new) * d * d / 6.0;
}

double s_half_derivative(double rho_new, double rho_old, const EntropyModel& model) {
  if (!model.admissible(rho_old)) throw DomainError("s_half (old density)", rho_old);
  const double d = rho_new - rho_old;
  return 0.5 * model.f2(rho_new) - model.f3(rho_new) * d / 6.0 + model.f4(rho_new) * d * d / 6.0;
}

double s_half_potential(double rho_new, double rho_old, const EntropyModel& model) {
  if (!model.admissible(rho_old)) throw DomainError("s_half (old density)", rho_old);
  const double d = rho_new - rho_old;
  return 11.0 / 6.0 * model.f(rho_new) - 5.0 / 6.0 * model.f1(rho_new) * d +
         model.f2(rho_new) * d * d / 6.0;
}

namespace {

template <class Fn>
CellField pointwise(const CellField& a, const CellField& b, Fn&& fn) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("pointwise: grid mismatch");
  CellField out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) {
    try {
      out[i] = fn(a[i], b[i]);
    } catch (const DomainError& e) {
      throw DomainError("pointwise entropy evaluation", e.value(), i);
    }
  }
  return out;
}

}  // namespace

CellField s_half(const CellField& rho_new, const CellField& rho_old, const EntropyModel& model) {
  return pointwise(rho_new, rho_old, [&](double a, double b) { return s_half(a, b, model); });
}

CellField s_half_derivative(const CellField& rho_new, const CellField& rho_old,
                            const EntropyModel& model) {
  return pointwise(rho_new, rho_old,
                   [&](double a, double b) { return s_half_derivative(a, b, model); });
}

CellField mobility(const CellField& rho, const EntropyModel& model) {
  return pointwise(rho, rho, [&](double a, double) { return model.mobility(a); });
}

CellField entropy(const CellField& rho, const EntropyModel& model) {
  return pointwise(rho, rho, [&](double a, double) { return model.f(a); });
}

void require_admissible(const CellField& rho, const EntropyModel& model) {
  for (std::size_t i = 0; i < rho.size(); ++i)
    if (!model.admissible(rho[i])) throw DomainError("admissibility check", rho[i], i);
}

}  // namespace pks
