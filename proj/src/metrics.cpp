#include "lpf/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "lpf/errors.hpp"
#include "lpf/swe.hpp"

namespace lpf {

namespace {

double l2_diff(const Field& a, const Field& b, int d) {
  const double cell = 1.0 / (static_cast<double>(d) * d);
  double sum = 0.0;
  for (int j = 1; j <= d; ++j) {
    for (int i = 1; i <= d; ++i) {
      const double r = a(i, j) - b(i, j);
      sum += r * r;
    }
  }
  return std::sqrt(sum * cell);
}

Field ensemble_mean(const std::vector<const Field*>& ensemble) {
  Field m(ensemble[0]->nx(), ensemble[0]->ny(), 0.0);
  const double w = 1.0 / ensemble.size();
  for (const Field* f : ensemble) {
    const double* src = f->data();
    double* dst = m.data();
    for (std::size_t i = 0; i < m.size(); ++i) dst[i] += w * src[i];
  }
  return m;
}

double signal_norm_or_throw(const Field& signal, int d) {
  const double n = l2_interior(signal, d);
  if (n <= 0.0) throw InvalidArgument("signal has zero L2 norm");
  return n;
}

}  // namespace

double emre(const Field& signal, const std::vector<const Field*>& ensemble) {
  const int d = signal.nx() - 2;
  const double nf = signal_norm_or_throw(signal, d);
  double acc = 0.0;
  for (const Field* f : ensemble) acc += l2_diff(signal, *f, d);
  return acc / (ensemble.size() * nf);
}

double rb(const Field& signal, const std::vector<const Field*>& ensemble) {
  const int d = signal.nx() - 2;
  const double nf = signal_norm_or_throw(signal, d);
  Field mean = ensemble_mean(ensemble);
  return l2_diff(signal, mean, d) / nf;
}

double res(const Field& signal, const std::vector<const Field*>& ensemble) {
  const int d = signal.nx() - 2;
  if (ensemble.size() < 2) throw InvalidArgument("spread needs at least two members");
  const double nf = signal_norm_or_throw(signal, d);
  Field mean = ensemble_mean(ensemble);
  double acc = 0.0;
  for (const Field* f : ensemble) acc += l2_diff(*f, mean, d);
  return acc / ((ensemble.size() - 1) * nf);
}

double rmse_obs(const Field& signal, const std::vector<const Field*>& ensemble,
                const std::vector<GridPoint>& locations) {
  if (locations.empty()) throw InvalidArgument("no observation locations");
  const double invN = 1.0 / ensemble.size();
  double acc = 0.0;
  for (const auto& z : locations) {
    const double truth = signal(z.ix + 1, z.iy + 1);
    double sq = 0.0;
    for (const Field* f : ensemble) {
      const double r = truth - (*f)(z.ix + 1, z.iy + 1);
      sq += r * r;
    }
    acc += std::sqrt(sq * invN);
  }
  return acc / locations.size();
}

double crps_ensemble(const std::vector<double>& members, double truth) {
  const std::size_t n = members.size();
  double t1 = 0.0;
  for (double x : members) t1 += std::abs(x - truth);
  t1 /= n;
  double t2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) t2 += std::abs(members[i] - members[j]);
  }
  t2 /= 2.0 * n * n;
  return t1 - t2;
}

double crps_obs(const Field& signal, const std::vector<const Field*>& ensemble,
                const std::vector<GridPoint>& locations) {
  if (locations.empty()) throw InvalidArgument("no observation locations");
  std::vector<double> members(ensemble.size());
  double acc = 0.0;
  for (const auto& z : locations) {
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
      members[i] = (*ensemble[i])(z.ix + 1, z.iy + 1);
    }
    acc += crps_ensemble(members, signal(z.ix + 1, z.iy + 1));
  }
  return acc / locations.size();
}

const char* const kMetricsCsvHeader =
    "k,emre_u,rb_u,res_u,emre_v,rb_v,res_v,emre_eta,rb_eta,res_eta,rmse_eta,crps_eta";

void write_metric_csv_row(std::ostream& os, const MetricRecord& m) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", m.k,
                m.emre_u, m.rb_u, m.res_u, m.emre_v, m.rb_v, m.res_v, m.emre_eta, m.rb_eta,
                m.res_eta, m.rmse_eta, m.crps_eta);
  os << buf << '\n';
}

MetricRecord compute_metrics(int k, const StaggeredState& signal,
                             const std::vector<const StaggeredState*>& ensemble,
                             const std::vector<GridPoint>& locations) {
  MetricRecord m;
  m.k = k;
  std::vector<const Field*> fu, fv, fe;
  fu.reserve(ensemble.size());
  fv.reserve(ensemble.size());
  fe.reserve(ensemble.size());
  for (const StaggeredState* s : ensemble) {
    fu.push_back(&s->u);
    fv.push_back(&s->v);
    fe.push_back(&s->eta);
  }
  m.emre_u = emre(signal.u, fu);
  m.rb_u = rb(signal.u, fu);
  m.res_u = res(signal.u, fu);
  m.emre_v = emre(signal.v, fv);
  m.rb_v = rb(signal.v, fv);
  m.res_v = res(signal.v, fv);
  m.emre_eta = emre(signal.eta, fe);
  m.rb_eta = rb(signal.eta, fe);
  m.res_eta = res(signal.eta, fe);
  m.rmse_eta = rmse_obs(signal.eta, fe, locations);
  m.crps_eta = crps_obs(signal.eta, fe, locations);
  return m;
}

}  // namespace lpf
