#include "core/models.hpp"

#include <cmath>
#include <functional>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "core/parallel.hpp"

namespace smim::models {

namespace {

double sign(double x) { return x >= 0.0 ? 1.0 : -1.0; }

double he_norm(int k, double u) {
  switch (k) {
    case 1: return u;
    case 2: return (u * u - 1.0) / std::sqrt(2.0);
    case 3: return (u * u * u - 3.0 * u) / std::sqrt(6.0);
    default: throw std::invalid_argument("he_norm: order out of range");
  }
}

double clip(double v, double b) { return v > b ? b : (v < -b ? -b : v); }

double gauss_expect(const std::function<double(double)>& f) {
  // midpoint rule over [-8, 8] against the standard normal density
  const int n = 4001;
  const double lo = -8.0, hi = 8.0, h = (hi - lo) / n;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = lo + (i + 0.5) * h;
    acc += f(u) * std::exp(-0.5 * u * u);
  }
  return acc * h / std::sqrt(2.0 * 3.14159265358979323846);
}

// Tilted-density links with an exact generative exponent: the conditional law
// is phi(y) (1 + alpha R(y) T_k(u)) with bounded T_k orthogonal to all Hermite
// levels below k, so E[he_j(u) | y] vanishes identically for 1 <= j < k.
struct GenLinkTables {
  double a3;      // Gram-Schmidt coefficient removing the he_1 component of clip(he_3)
  double m2;      // mean of clip(he_2)
  double bound[4];
  GenLinkTables() {
    const double num = gauss_expect([](double u) { return clip(he_norm(3, u), 2.0) * u; });
    const double den = gauss_expect([](double u) { return clip(u, 2.0) * u; });
    a3 = num / den;
    m2 = gauss_expect([](double u) { return clip(he_norm(2, u), 2.0); });
    bound[1] = 2.0;
    bound[2] = 2.0 + std::abs(m2);
    bound[3] = 2.0 + std::abs(a3) * 2.0;
  }
  double t(int k, double u) const {
    switch (k) {
      case 1: return clip(u, 2.0);
      case 2: return clip(he_norm(2, u), 2.0) - m2;
      case 3: return clip(he_norm(3, u), 2.0) - a3 * clip(u, 2.0);
      default: throw std::invalid_argument("gen link: order out of range");
    }
  }
};

const GenLinkTables& gen_tables() {
  static const GenLinkTables tables;
  return tables;
}

// y with marginal N(0,1) and conditional tilt of exact order k (labels keep a
// Theta(1) degree-k harmonic coefficient while all lower ones vanish).
double sample_gen_label(int k, double u, Rng& rng) {
  const GenLinkTables& tab = gen_tables();
  const double alpha = 0.49 / tab.bound[static_cast<std::size_t>(k)];
  const double tk = tab.t(k, u);
  for (;;) {
    const double y = rng.normal();
    const double accept = 0.5 * (1.0 + alpha * clip(he_norm(k, y), 2.0) * tk);
    if (rng.uniform() < accept) return y;
  }
}

double scalar_link(const std::string& id, double u) {
  if (id == "he1" || id == "linear") return u;
  if (id == "he2") return he_norm(2, u);
  if (id == "he3") return he_norm(3, u);
  if (id == "sign") return sign(u);
  if (id == "abs") return std::abs(u);
  if (id == "relu") return u > 0.0 ? u : 0.0;
  throw std::invalid_argument("unknown scalar link id: " + id);
}

bool is_gen_link(const std::string& id, int* k) {
  if (id == "gen1" || id == "gen2" || id == "gen3") {
    *k = id[3] - '0';
    return true;
  }
  return false;
}

double vector_link(const std::string& id, const Eigen::VectorXd& u) {
  if (id == "prodsign") {
    double p = 1.0;
    for (double v : u) p *= v;
    return sign(p);
  }
  if (id == "normsq") {
    const double s = static_cast<double>(u.size());
    return (u.squaredNorm() - s) / std::sqrt(2.0 * s);
  }
  throw std::invalid_argument("unknown vector link id: " + id);
}

double eval_poly_term(const tensor::Tensor& c, const Eigen::VectorXd& u) {
  // <C_j, u^{ox j}> by folding u into the last mode repeatedly
  Eigen::VectorXd cur = c.data();
  Eigen::Index size = cur.size();
  for (int k = 0; k < c.order(); ++k) {
    size /= c.dim();
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
        cur.data(), size, c.dim());
    Eigen::VectorXd next = m * u;
    cur = std::move(next);
  }
  return cur[0];
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

int LinkSpec::label_arity() const {
  switch (kind) {
    case LinkKind::kGaussianSim:
    case LinkKind::kGaussianMim:
      return 2;  // (y_raw, r)
    default:
      return 1;
  }
}

bool LinkSpec::emits_radius() const {
  return kind == LinkKind::kGaussianSim || kind == LinkKind::kGaussianMim;
}

LinkSpec LinkSpec::parity(int s, double sigma) {
  LinkSpec l;
  l.kind = LinkKind::kParity;
  l.s = s;
  l.sigma = sigma;
  return l;
}

LinkSpec LinkSpec::staircase(double sigma) {
  LinkSpec l;
  l.kind = LinkKind::kStaircase;
  l.s = 3;
  l.sigma = sigma;
  return l;
}

LinkSpec LinkSpec::mixture_parity(int k0, int k1, int k2, double p, double sigma) {
  LinkSpec l;
  l.kind = LinkKind::kMixtureOfParities;
  l.k0 = k0;
  l.k1 = k1;
  l.k2 = k2;
  l.p = p;
  l.sigma = sigma;
  l.s = k1 + k2 - k0;
  return l;
}

void LinkSpec::sample_label(const Eigen::VectorXd& t, int d, Rng& rng, double* y) const {
  if (t.size() != s) throw std::invalid_argument("sample_label: frame/link index mismatch");
  switch (kind) {
    case LinkKind::kParity: {
      double prod = 1.0;
      for (double v : t) prod *= v;
      y[0] = sign(prod) + sigma * rng.normal();
      return;
    }
    case LinkKind::kMixtureOfParities: {
      // directions [0, k1) carry the small parity, [k1-k0, k1-k0+k2) the big
      // one; they share k0 directions.
      double pa = 1.0, pb = 1.0;
      for (int i = 0; i < k1; ++i) pa *= t[i];
      for (int i = k1 - k0; i < k1 - k0 + k2; ++i) pb *= t[i];
      const double eta = rng.uniform() < p ? 1.0 : 0.0;
      y[0] = eta * sign(pa) + (1.0 - eta) * sign(pb) + sigma * rng.normal();
      return;
    }
    case LinkKind::kStaircase: {
      y[0] = sign(t[0]) + sign(t[0] * t[1] * t[2]) + sigma * rng.normal();
      return;
    }
    case LinkKind::kGaussianSim: {
      const double r = rng.chi(d);
      int gk = 0;
      const double raw = is_gen_link(id, &gk) ? sample_gen_label(gk, r * t[0], rng)
                                              : scalar_link(id, r * t[0]);
      y[0] = raw + sigma * rng.normal();
      y[1] = r;
      return;
    }
    case LinkKind::kGaussianMim: {
      const double r = rng.chi(d);
      y[0] = vector_link(id, r * t) + sigma * rng.normal();
      y[1] = r;
      return;
    }
    case LinkKind::kDirectionalMim: {
      const double r = rng.chi(d);
      int gk = 0;
      double raw;
      if (s == 1) {
        raw = is_gen_link(id, &gk) ? sample_gen_label(gk, r * t[0], rng)
                                   : scalar_link(id, r * t[0]);
      } else {
        raw = vector_link(id, r * t);
      }
      y[0] = raw + sigma * rng.normal();
      return;
    }
    case LinkKind::kPolynomial: {
      const Eigen::VectorXd u = std::sqrt(static_cast<double>(d)) * t;
      double v = c0;
      for (const auto& c : poly) v += eval_poly_term(c, u);
      y[0] = v + sigma * rng.normal();
      return;
    }
  }
  throw std::logic_error("sample_label: unhandled link kind");
}

std::string LinkSpec::canonical() const {
  std::ostringstream os;
  switch (kind) {
    case LinkKind::kParity:
      os << "parity(s=" << s << ",sigma=" << fmt(sigma) << ")";
      break;
    case LinkKind::kMixtureOfParities:
      os << "mixture_parity(k0=" << k0 << ",k1=" << k1 << ",k2=" << k2 << ",p=" << fmt(p)
         << ",sigma=" << fmt(sigma) << ")";
      break;
    case LinkKind::kStaircase:
      os << "staircase(sigma=" << fmt(sigma) << ")";
      break;
    case LinkKind::kGaussianSim:
      os << "gaussian_sim(id=" << id << ",sigma=" << fmt(sigma) << ")";
      break;
    case LinkKind::kGaussianMim:
      os << "gaussian_mim(s=" << s << ",id=" << id << ",sigma=" << fmt(sigma) << ")";
      break;
    case LinkKind::kDirectionalMim:
      os << "directional_mim(s=" << s << ",id=" << id << ",sigma=" << fmt(sigma) << ")";
      break;
    case LinkKind::kPolynomial: {
      os << "poly(s=" << s << ",c0=" << fmt(c0);
      for (std::size_t j = 0; j < poly.size(); ++j) {
        os << ",c" << (j + 1) << "=[";
        for (Eigen::Index i = 0; i < poly[j].data().size(); ++i) {
          if (i) os << " ";
          os << fmt(poly[j].data()[i]);
        }
        os << "]";
      }
      os << ",sigma=" << fmt(sigma) << ")";
      break;
    }
  }
  return os.str();
}

uint64_t LinkSpec::hash() const { return fnv1a(canonical()); }

namespace {

struct KvList {
  std::string name;
  std::vector<std::pair<std::string, std::string>> kv;
  const std::string* find(const std::string& k) const {
    for (const auto& [key, val] : kv)
      if (key == k) return &val;
    return nullptr;
  }
  std::string require(const std::string& k) const {
    const std::string* v = find(k);
    if (!v) throw std::invalid_argument("link spec: missing field '" + k + "'");
    return *v;
  }
  double num(const std::string& k, double dflt) const {
    const std::string* v = find(k);
    return v ? std::stod(*v) : dflt;
  }
};

KvList parse_call(const std::string& text) {
  const auto lp = text.find('(');
  const auto rp = text.rfind(')');
  if (lp == std::string::npos || rp == std::string::npos || rp < lp)
    throw std::invalid_argument("link spec: expected name(key=value,...): " + text);
  KvList out;
  out.name = text.substr(0, lp);
  std::string body = text.substr(lp + 1, rp - lp - 1);
  std::size_t i = 0;
  while (i < body.size()) {
    std::size_t eq = body.find('=', i);
    if (eq == std::string::npos) {
      if (body.find_first_not_of(" ,", i) == std::string::npos) break;
      throw std::invalid_argument("link spec: malformed field near '" + body.substr(i) + "'");
    }
    std::string key = body.substr(i, eq - i);
    key.erase(0, key.find_first_not_of(" ,"));
    key.erase(key.find_last_not_of(" ") + 1);
    std::size_t end;
    std::string val;
    if (eq + 1 < body.size() && body[eq + 1] == '[') {
      end = body.find(']', eq + 1);
      if (end == std::string::npos) throw std::invalid_argument("link spec: unterminated '['");
      val = body.substr(eq + 2, end - eq - 2);
      ++end;
    } else {
      end = body.find(',', eq + 1);
      if (end == std::string::npos) end = body.size();
      val = body.substr(eq + 1, end - eq - 1);
    }
    out.kv.emplace_back(key, val);
    i = end + 1;
  }
  return out;
}

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  std::istringstream is(text);
  std::string tok;
  while (is >> tok) {
    if (tok == ",") continue;
    out.push_back(std::stod(tok));
  }
  return out;
}

}  // namespace

LinkSpec LinkSpec::parse(const std::string& text) {
  const KvList call = parse_call(text);
  LinkSpec l;
  l.sigma = call.num("sigma", 0.0);
  if (call.name == "parity") {
    l.kind = LinkKind::kParity;
    l.s = static_cast<int>(call.num("s", 2));
    if (l.s < 2) throw std::invalid_argument("parity: need s >= 2");
  } else if (call.name == "mixture_parity") {
    l.kind = LinkKind::kMixtureOfParities;
    l.k0 = static_cast<int>(call.num("k0", 0));
    l.k1 = static_cast<int>(call.num("k1", 0));
    l.k2 = static_cast<int>(call.num("k2", 0));
    l.p = call.num("p", 0.0);
    if (!(l.k0 < l.k1 && l.k1 < l.k2) || l.k0 < 1)
      throw std::invalid_argument("mixture_parity: need 1 <= k0 < k1 < k2");
    if (!(l.p > 0.0 && l.p < 0.5)) throw std::invalid_argument("mixture_parity: need p in (0, 1/2)");
    l.s = l.k1 + l.k2 - l.k0;
  } else if (call.name == "staircase") {
    l.kind = LinkKind::kStaircase;
    l.s = 3;
  } else if (call.name == "gaussian_sim") {
    l.kind = LinkKind::kGaussianSim;
    l.s = 1;
    l.id = call.require("id");
  } else if (call.name == "gaussian_mim") {
    l.kind = LinkKind::kGaussianMim;
    l.s = static_cast<int>(call.num("s", 2));
    l.id = call.require("id");
  } else if (call.name == "directional_mim") {
    l.kind = LinkKind::kDirectionalMim;
    l.s = static_cast<int>(call.num("s", 1));
    l.id = call.require("id");
  } else if (call.name == "poly") {
    l.kind = LinkKind::kPolynomial;
    l.s = static_cast<int>(call.num("s", 1));
    l.c0 = call.num("c0", 0.0);
    for (int j = 1; j <= 4; ++j) {
      const std::string* v = call.find("c" + std::to_string(j));
      if (!v) break;
      const std::vector<double> vals = parse_numbers(*v);
      if (static_cast<Eigen::Index>(vals.size()) != tensor::pow_ll(l.s, j))
        throw std::invalid_argument("poly: c" + std::to_string(j) + " needs s^j entries");
      Eigen::VectorXd data = Eigen::Map<const Eigen::VectorXd>(vals.data(), vals.size());
      tensor::Tensor c(l.s, j, data);
      l.poly.push_back(tensor::sym_project(c));
    }
    if (l.poly.empty() ) throw std::invalid_argument("poly: needs at least c1");
  } else {
    throw std::invalid_argument("unknown link kind: " + call.name);
  }
  if (l.sigma < 0) throw std::invalid_argument("link spec: sigma >= 0 required");
  return l;
}

Eigen::VectorXd sample_sphere(int d, Rng& rng) {
  if (d < 2) throw std::invalid_argument("sample_sphere: need d >= 2");
  Eigen::VectorXd z(d);
  for (;;) {
    for (int i = 0; i < d; ++i) z[i] = rng.normal();
    const double n = z.norm();
    if (n > 1e-12) return z / n;
  }
}

uint64_t frame_hash(const tensor::Frame& w) {
  std::string bytes(reinterpret_cast<const char*>(w.cols().data()),
                    sizeof(double) * static_cast<std::size_t>(w.cols().size()));
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

Dataset sample_mim(const LinkSpec& link, const tensor::Frame& w, int n, uint64_t seed) {
  if (w.rank() != link.s) throw std::invalid_argument("sample_mim: frame rank != link index");
  if (n < 1) throw std::invalid_argument("sample_mim: need n >= 1");
  const int d = w.dim();
  const int arity = link.label_arity();
  Dataset ds;
  ds.d = d;
  ds.z.resize(d, n);
  ds.y.resize(arity, n);
  ds.link_hash = link.hash();
  ds.frame_hash = frame_hash(w);
  ds.seed = seed;
  parallel::for_chunks(static_cast<std::size_t>(n), 512, [&](std::size_t, std::size_t lo, std::size_t hi) {
    Eigen::VectorXd t(link.s);
    for (std::size_t i = lo; i < hi; ++i) {
      Rng rng = Rng::stream(seed, static_cast<uint64_t>(i));
      const Eigen::VectorXd z = sample_sphere(d, rng);
      ds.z.col(static_cast<Eigen::Index>(i)) = z;
      t.noalias() = w.cols().transpose() * z;
      link.sample_label(t, d, rng, ds.y.col(static_cast<Eigen::Index>(i)).data());
    }
  });
  return ds;
}

bool condition_sample(const Eigen::VectorXd& z, const tensor::Frame& u, const tensor::Frame& u_perp,
                      Eigen::VectorXd& r_u, Eigen::VectorXd& z_u) {
  r_u.noalias() = u.cols().transpose() * z;
  z_u.noalias() = u_perp.cols().transpose() * z;
  const double n = z_u.norm();
  if (n < 1e-12) return false;
  z_u /= n;
  return true;
}

ReducedDataset condition(const Dataset& data, const tensor::Frame& u, const tensor::Frame& u_perp) {
  if (u.dim() != data.d || u_perp.dim() != data.d) throw std::invalid_argument("condition: dim mismatch");
  if (u.rank() + u_perp.rank() != data.d) throw std::invalid_argument("condition: ranks must span R^d");
  const int su = u.rank();
  const int n = data.n();
  ReducedDataset out;
  out.data.d = data.d - su;
  out.data.link_hash = data.link_hash;
  out.data.frame_hash = data.frame_hash;
  out.data.seed = data.seed;
  out.data.z.resize(data.d - su, n);
  out.data.y.resize(data.arity() + su, n);
  Eigen::VectorXd r(su), zu(data.d - su);
  int kept = 0;
  for (int i = 0; i < n; ++i) {
    if (!condition_sample(data.z.col(i), u, u_perp, r, zu)) {
      out.dropped.push_back(i);
      continue;
    }
    out.data.z.col(kept) = zu;
    out.data.y.col(kept).head(data.arity()) = data.y.col(i);
    out.data.y.col(kept).tail(su) = r;
    ++kept;
  }
  out.data.z.conservativeResize(Eigen::NoChange, kept);
  out.data.y.conservativeResize(Eigen::NoChange, kept);
  return out;
}

}  // namespace smim::models
