#pragma once

#include "evtrack/abscheme.hpp"  // EmpiricalPoint
#include "evtrack/rdsolver.hpp"
#include "evtrack/rng.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace evtrack {

using Vector = Eigen::VectorXd;

/// A channel slot payload: a finite (possibly empty) bit string,
/// stored as '0'/'1' characters.
struct Packet {
  std::string bits;

  std::size_t length() const { return bits.size(); }
};

/// Innovation gain for the dithered quantizer: symmetric root of
/// (P*^{-1} - Pi*^{-1}) / 12, so that a unit-cell uniform quantizer acts
/// as a measurement with noise covariance I/12 and steady-state
/// posterior covariance P*.
Matrix design_quantizer_sensor(const DiscretizedModel& dmodel, double D_d,
                               const Matrix& Q);

/// Nearest integer with half-open cells [j - 1/2, j + 1/2).
std::vector<long long> uniform_quantize(const Vector& x);

/// Bijection from integers onto positive integers:
/// q > 0 -> 2q, q <= 0 -> -2q + 1.
std::vector<std::uint64_t> wrap_symbols(const std::vector<long long>& q);
std::vector<long long> unwrap_symbols(const std::vector<std::uint64_t>& s);

/// Components exceeding their cutoff are zeroed and reported in index
/// order; zeros in the output mark escaped positions.
struct TruncationResult {
  std::vector<std::uint64_t> truncated;
  std::vector<std::uint64_t> escaped;
};
TruncationResult truncate_symbols(const std::vector<std::uint64_t>& s,
                                  const std::vector<std::uint64_t>& cutoffs);

/// Shortlex enumeration of all binary strings including the empty one:
/// rank r -> binary expansion of r with the leading 1 removed.
Packet nonsingular_codeword(std::uint64_t rank);

/// Universal prefix-free code for positive integers.
Packet elias_omega(std::uint64_t n);
/// Decodes one omega codeword starting at cursor; advances cursor.
/// Throws std::runtime_error on bit exhaustion.
std::uint64_t elias_omega_decode(const std::string& bits, std::size_t& cursor);

/// Saturating-count empirical PMF over truncated symbol vectors, with
/// probability ranks resolved by count (descending) then lexicographic
/// symbol value; unseen symbols follow, in lexicographic order.
class PmfModel {
 public:
  PmfModel(std::vector<std::uint64_t> cutoffs, int precision_bits);

  std::uint64_t index_of(const std::vector<std::uint64_t>& symbol) const;
  std::vector<std::uint64_t> symbol_at(std::uint64_t index) const;

  std::uint64_t rank_of(const std::vector<std::uint64_t>& symbol) const;
  std::vector<std::uint64_t> symbol_of_rank(std::uint64_t rank) const;

  void update(const std::vector<std::uint64_t>& symbol);

  std::uint64_t support_size() const { return n_symbols_; }
  const std::map<std::uint64_t, std::uint64_t>& counts() const {
    return counts_;
  }

 private:
  std::vector<std::uint64_t> cutoffs_;
  std::uint64_t n_symbols_ = 0;
  std::uint64_t max_count_ = 0;
  std::map<std::uint64_t, std::uint64_t> counts_;  // lex index -> count > 0
};

struct CodecConfig {
  DiscretizedModel dmodel;
  Matrix C_tau;
  Matrix Sigma0;
  std::vector<std::uint64_t> cutoffs;  // default: 15 per component
  int precision_bits = 32;
  std::uint64_t seed = 0;
};

/// Per-step trace record (optional diagnostics output).
struct StepTrace {
  long k = 0;
  std::vector<std::uint64_t> symbol;
  std::uint64_t rank = 0;
  std::string bits;
  bool truncated = false;
};

namespace detail {

/// Deterministic filter chain both codec ends run in lockstep: the
/// covariances and gains never depend on the data.
struct KalmanChain {
  Matrix A, W, C, K, P_prior;
  Vector x_prior;

  void init(const DiscretizedModel& dmodel, const Matrix& C_tau,
            const Matrix& Sigma0);
  void refresh_gain();
  /// Posterior estimate given the exact dither-corrected innovation.
  Vector posterior(const Vector& innovation) const;
  void advance(const Vector& x_post);
};

}  // namespace detail

class DiqEncoder {
 public:
  explicit DiqEncoder(const CodecConfig& config);

  /// Consumes the plant state at step k, returns the slot-k packet.
  Packet encode_step(const Vector& x);

  /// Decoder-replica posterior estimate for the step just encoded
  /// (prediction when that step was truncated).
  const Vector& replica_estimate() const { return replica_post_; }
  const StepTrace& last_trace() const { return trace_; }
  const PmfModel& pmf() const { return pmf_; }

 private:
  CodecConfig cfg_;
  PmfModel pmf_;
  detail::KalmanChain chain_;
  std::vector<std::uint64_t> pending_escapes_;
  Vector replica_post_;
  StepTrace trace_;
  long k_ = 0;
};

class DiqDecoder {
 public:
  explicit DiqDecoder(const CodecConfig& config);

  /// Consumes the slot-k packet, returns the posterior state estimate
  /// for step k (prediction when the symbol was truncated).
  Vector decode_step(const Packet& packet);

  const PmfModel& pmf() const { return pmf_; }

 private:
  CodecConfig cfg_;
  PmfModel pmf_;
  detail::KalmanChain chain_;
  // Resynchronization state for a truncation at the previous step.
  std::size_t pending_escape_count_ = 0;
  std::vector<std::uint64_t> held_symbol_;
  Vector held_prior_;
  Matrix held_gain_;
  long k_ = 0;
};

struct CodecRunOptions {
  long steps = 10000;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> cutoffs;  // empty: 15 per component
  int precision_bits = 32;
  std::ostream* trace = nullptr;
};

/// Paired encoder/decoder simulation; rate counts every transmitted bit
/// (escape codes charged to the slot carrying them), distortion uses the
/// decoder's running posterior.
EmpiricalPoint run_codec(const StateSpaceModel& model, double Dc, double tau,
                         const CodecRunOptions& options = {});

}  // namespace evtrack
