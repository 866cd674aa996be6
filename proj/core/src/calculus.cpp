#include "subvar/calculus.hpp"

namespace subvar {

BracketTable bracket_table(const ManifoldModel& m, const FieldSetFn& fields, const Point& x, const FdSettings& fd) {
  BracketTable out;
  out.values = fields(x);
  out.m = static_cast<int>(out.values.cols());
  const Brackets c = m.brackets(x);
  std::vector<FieldMat> deriv;
  deriv.reserve(static_cast<size_t>(out.m));
  for (int k = 0; k < out.m; ++k) deriv.push_back(directional(m, fields, x, Vec(out.values.col(k)), fd));
  out.table.assign(static_cast<size_t>(out.m * out.m), Vec::Zero(m.dim()));
  for (int k = 0; k < out.m; ++k) {
    for (int l = k + 1; l < out.m; ++l) {
      const Vec X = out.values.col(k);
      const Vec Y = out.values.col(l);
      Vec b = Vec(deriv[static_cast<size_t>(k)].col(l)) - Vec(deriv[static_cast<size_t>(l)].col(k)) + c.apply(X, Y);
      out.table[static_cast<size_t>(k * out.m + l)] = b;
      out.table[static_cast<size_t>(l * out.m + k)] = -b;
    }
  }
  return out;
}

Vec bracket(const ManifoldModel& m, const FieldFn& X, const FieldFn& Y, const Point& x, const FdSettings& fd) {
  const Vec xv = X(x);
  const Vec yv = Y(x);
  return directional(m, Y, x, xv, fd) - directional(m, X, x, yv, fd) + m.brackets(x).apply(xv, yv);
}

double jacobi_residual(const ManifoldModel& m, const Point& x, const FdSettings& fd) {
  const int d = m.dim();
  const Brackets c = m.brackets(x);
  // [[F_mu, F_nu], F_rho] = sum_s c(mu,nu)_s [F_s, F_rho] - F_rho(c(mu,nu)) .
  std::vector<Brackets> dc;
  if (!m.exact_brackets()) {
    for (int rho = 0; rho < d; ++rho) {
      Brackets b(d);
      for (int mu = 0; mu < d; ++mu) {
        for (int nu = mu + 1; nu < d; ++nu) {
          auto coeff = [&](const Point& y) -> Vec { return m.brackets(y).at(mu, nu); };
          b.at(mu, nu) = directional(m, coeff, x, unit(d, rho), fd);
          b.at(nu, mu) = -b.at(mu, nu);
        }
      }
      dc.push_back(std::move(b));
    }
  }
  auto nested = [&](int mu, int nu, int rho) {
    Vec out = c.apply(c.at(mu, nu), unit(d, rho));
    if (!dc.empty()) out -= dc[static_cast<size_t>(rho)].at(mu, nu);
    return out;
  };
  double worst = 0.0;
  for (int mu = 0; mu < d; ++mu)
    for (int nu = mu + 1; nu < d; ++nu)
      for (int rho = nu + 1; rho < d; ++rho) {
        const Vec s = nested(mu, nu, rho) + nested(nu, rho, mu) + nested(rho, mu, nu);
        worst = std::max(worst, s.cwiseAbs().maxCoeff());
      }
  return worst;
}

}  // namespace subvar
