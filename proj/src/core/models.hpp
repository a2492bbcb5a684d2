#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "core/frame.hpp"
#include "core/rng.hpp"
#include "core/tensor.hpp"

namespace smim::models {

enum class LinkKind {
  kParity,
  kMixtureOfParities,
  kStaircase,
  kGaussianSim,
  kGaussianMim,
  kDirectionalMim,
  kPolynomial,
};

// Declarative description of the conditional law of the label given the
// projected input. Parsed from / serialized to a compact spec string, e.g.
//   parity(s=2,sigma=0.1)
//   mixture_parity(k0=1,k1=2,k2=3,p=0.3,sigma=0.1)
//   staircase(sigma=0.1)
//   gaussian_sim(id=he2,sigma=0.1)
//   gaussian_mim(s=2,id=prodsign,sigma=0.1)
//   directional_mim(s=1,id=he3,sigma=0.1)
//   poly(s=1,c0=0,c1=[1],sigma=0.5)
struct LinkSpec {
  LinkKind kind = LinkKind::kParity;
  int s = 1;
  double sigma = 0.0;
  int k0 = 0, k1 = 0, k2 = 0;  // mixture of parities
  double p = 0.0;
  std::string id;  // scalar / vector link id for the Gaussian variants
  double c0 = 0.0;
  std::vector<tensor::Tensor> poly;  // C_j over R^s, j = 1..degree

  int label_arity() const;
  bool emits_radius() const;  // Gaussian variants append r to the label
  bool needs_ambient_dim() const { return kind != LinkKind::kParity; }

  std::string canonical() const;
  uint64_t hash() const;
  static LinkSpec parse(const std::string& text);

  // Draws the label given t = W^T z (length s) in ambient dimension d.
  // All randomness (radius, mixture, noise) comes from rng in a fixed order.
  void sample_label(const Eigen::VectorXd& t, int d, Rng& rng, double* y) const;

  static LinkSpec parity(int s, double sigma);
  static LinkSpec staircase(double sigma);
  static LinkSpec mixture_parity(int k0, int k1, int k2, double p, double sigma);
};

struct Dataset {
  int d = 0;
  Eigen::MatrixXd z;  // d x n, unit columns
  Eigen::MatrixXd y;  // arity x n
  uint64_t link_hash = 0;
  uint64_t frame_hash = 0;
  uint64_t seed = 0;

  int n() const { return static_cast<int>(z.cols()); }
  int arity() const { return static_cast<int>(y.rows()); }
};

// Uniform draw on S^{d-1}: normalized Gaussian vector.
Eigen::VectorXd sample_sphere(int d, Rng& rng);

// n i.i.d. samples from the spherical MIM (link, W). Per-sample randomness is
// a substream of (seed, sample index), so generation parallelizes without
// affecting the output.
Dataset sample_mim(const LinkSpec& link, const tensor::Frame& w, int n, uint64_t seed);

uint64_t frame_hash(const tensor::Frame& w);

struct ReducedDataset {
  Dataset data;                    // dim d - s_U, labels (y, r_U)
  std::vector<int> dropped;        // sample indices lost to the degenerate case
};

// Conditions every sample on the frame U: r_U = U^T z, z_U = normalized
// residual, y_U = (y, r_U). Samples with ||U_perp^T z|| < 1e-12 are dropped.
ReducedDataset condition(const Dataset& data, const tensor::Frame& u, const tensor::Frame& u_perp);

// Single-sample version; returns false for the degenerate case.
bool condition_sample(const Eigen::VectorXd& z, const tensor::Frame& u, const tensor::Frame& u_perp,
                      Eigen::VectorXd& r_u, Eigen::VectorXd& z_u);

}  // namespace smim::models
