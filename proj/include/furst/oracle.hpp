#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "furst/circle.hpp"
#include "furst/density.hpp"

namespace furst {

namespace systems {

/// x -> x + alpha on R/Z with A = [0, beta).
struct Rotation {
  RealParam alpha;
  RealParam beta;
};

/// Stationary Markov shift on state sequences, A = {x : x(0) in accept}.
struct Markov {
  Eigen::MatrixXd transition;
  Eigen::RowVectorXd stationary;
  std::vector<int> accept;  // sorted state indices
};

/// Rotation by one on Z/pZ with A = {t : pattern[t] = 1}.
struct Periodic {
  std::vector<bool> pattern;
};

}  // namespace systems

/// Exactly solvable Z-system with closed-form intersection measures.
class OracleSystem {
 public:
  using Kind = std::variant<systems::Rotation, systems::Markov, systems::Periodic>;

  /// alpha must be irrational (no q <= 10^4 with ||q alpha|| < 2^-64), beta in (0,1].
  static OracleSystem rotation(const RealParam& alpha, const RealParam& beta);
  /// Rows of P sum to 1. If `stationary` is empty it is solved for; either
  /// way pi P = pi must hold within 1e-12 and pi > 0.
  static OracleSystem markov(const Eigen::MatrixXd& transition, std::vector<int> accept,
                             std::optional<Eigen::RowVectorXd> stationary = std::nullopt);
  static OracleSystem periodic(std::vector<bool> pattern);

  const Kind& kind() const noexcept { return kind_; }
  std::string str() const;

 private:
  explicit OracleSystem(Kind kind) : kind_(std::move(kind)) {}
  Kind kind_;
};

/// Solves pi P = pi, sum(pi) = 1.
Eigen::RowVectorXd stationary_distribution(const Eigen::MatrixXd& transition);

/// mu(T^{-h_1}A ∩ ... ∩ T^{-h_r}A). Periodic results are exact.
struct MeasureValue {
  double value = 0;
  std::optional<Rational> exact;
};

MeasureValue exact_measure(const OracleSystem& sys, const std::vector<std::int64_t>& shifts);

/// Starting data for an orbit: circle point, RNG seed or residue, by kind.
struct OrbitStart {
  RealParam point;
  std::uint64_t seed = 0;
  std::int64_t residue = 0;
};

/// E(x) = {n : T^n x in A} realized on a finite window of Z.
struct OrbitHandle {
  OracleSystem system;
  OrbitStart start;
  std::shared_ptr<const IndicatorWindow> window;

  SetSpec set() const;
};

inline constexpr std::uint64_t kDefaultWindowCap = std::uint64_t{1} << 32;

/// Throws "window cap exceeded" if the window holds more than cap bits.
OrbitHandle orbit_set(const OracleSystem& sys, const OrbitStart& start, std::int64_t lo, std::int64_t hi,
                      std::uint64_t cap = kDefaultWindowCap);

struct CorrespondenceRow {
  std::uint64_t n = 0;
  Rational density;
  double deviation = 0;  // |density - measure|
};

struct CorrespondenceQuery {
  std::vector<std::int64_t> shifts;
  MeasureValue measure;
  std::vector<CorrespondenceRow> rows;
  double final_deviation = 0;
  double tolerance = 0;
  double sigma = 0;  // batch-means standard error (Markov only)
  bool pass = false;
};

struct CorrespondenceOptions {
  double rotation_tolerance = 5e-3;
  double markov_sigmas = 4;
  std::size_t batches = 32;
  std::uint64_t window_cap = kDefaultWindowCap;
};

struct CorrespondenceReport {
  std::vector<CorrespondenceQuery> queries;
  bool pass = false;
  /// The implemented oracles converge along the full sequence; no subsequence is extracted.
  std::string note;
};

CorrespondenceReport verify_correspondence(const OracleSystem& sys, const OrbitStart& start,
                                           const std::vector<CorrelationQuery>& queries, const FolnerSpec& f,
                                           const Schedule& schedule, const CorrespondenceOptions& options = {});

}  // namespace furst
