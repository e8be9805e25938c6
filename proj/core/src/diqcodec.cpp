#include "evtrack/diqcodec.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <stdexcept>

namespace evtrack {

namespace {

// Dither streams are keyed by component so both codec ends regenerate
// the same sequence from (seed, component, step).
Vector dither_at(std::uint64_t seed, long k, int dim) {
  Vector d(dim);
  for (int i = 0; i < dim; ++i) {
    d(i) = CounterRng(seed, static_cast<std::uint64_t>(i))
               .uniform_centered(static_cast<std::uint64_t>(k));
  }
  return d;
}

}  // namespace

Matrix design_quantizer_sensor(const DiscretizedModel& dmodel, double D_d,
                               const Matrix& Q) {
  const DTRateSolution rd = solve_dt_rate(dmodel, D_d, Q);
  const int n = dmodel.dim();
  const Matrix I = Matrix::Identity(n, n);
  const Matrix Pinv = rd.P_star.llt().solve(I);
  const Matrix Piinv = rd.Pi_star.llt().solve(I);
  const Matrix E = symmetrize((Pinv - Piinv) / 12.0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(E);
  Eigen::VectorXd lam = es.eigenvalues();
  if (lam.minCoeff() < -1e-9) {
    throw std::runtime_error(
        "design_quantizer_sensor: P*^-1 - Pi*^-1 not PSD");
  }
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    lam(i) = std::sqrt(std::max(lam(i), 0.0));
  }
  return symmetrize(es.eigenvectors() * lam.asDiagonal() *
                    es.eigenvectors().transpose());
}

std::vector<long long> uniform_quantize(const Vector& x) {
  if (!x.allFinite()) {
    throw std::invalid_argument("uniform_quantize: non-finite input");
  }
  std::vector<long long> q(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    q[i] = static_cast<long long>(std::floor(x(i) + 0.5));
  }
  return q;
}

std::vector<std::uint64_t> wrap_symbols(const std::vector<long long>& q) {
  std::vector<std::uint64_t> s(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    s[i] = q[i] > 0 ? static_cast<std::uint64_t>(2 * q[i])
                    : static_cast<std::uint64_t>(-2 * q[i] + 1);
  }
  return s;
}

std::vector<long long> unwrap_symbols(const std::vector<std::uint64_t>& s) {
  std::vector<long long> q(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == 0) {
      throw std::invalid_argument("unwrap_symbols: zero is not a codepoint");
    }
    q[i] = (s[i] % 2 == 0) ? static_cast<long long>(s[i] / 2)
                           : -static_cast<long long>((s[i] - 1) / 2);
  }
  return q;
}

TruncationResult truncate_symbols(const std::vector<std::uint64_t>& s,
                                  const std::vector<std::uint64_t>& cutoffs) {
  if (s.size() != cutoffs.size()) {
    throw std::invalid_argument("truncate_symbols: length mismatch");
  }
  TruncationResult r;
  r.truncated = s;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] > cutoffs[i]) {
      r.truncated[i] = 0;
      r.escaped.push_back(s[i]);
    }
  }
  return r;
}

Packet nonsingular_codeword(std::uint64_t rank) {
  if (rank == 0) {
    throw std::invalid_argument("nonsingular_codeword: rank must be >= 1");
  }
  // Binary expansion of rank with its leading 1 removed.
  std::string bits;
  while (rank > 1) {
    bits.push_back((rank & 1) ? '1' : '0');
    rank >>= 1;
  }
  std::reverse(bits.begin(), bits.end());
  return Packet{std::move(bits)};
}

Packet elias_omega(std::uint64_t n) {
  if (n == 0) {
    throw std::invalid_argument("elias_omega: n must be >= 1");
  }
  std::string out = "0";
  while (n > 1) {
    std::string group;
    std::uint64_t v = n;
    while (v > 0) {
      group.push_back((v & 1) ? '1' : '0');
      v >>= 1;
    }
    std::reverse(group.begin(), group.end());
    out.insert(0, group);
    n = group.size() - 1;
  }
  return Packet{std::move(out)};
}

std::uint64_t elias_omega_decode(const std::string& bits,
                                 std::size_t& cursor) {
  std::uint64_t n = 1;
  for (;;) {
    if (cursor >= bits.size()) {
      throw std::runtime_error("elias_omega_decode: bit exhaustion");
    }
    if (bits[cursor] == '0') {
      ++cursor;
      return n;
    }
    const std::uint64_t group_len = n + 1;
    if (cursor + group_len > bits.size()) {
      throw std::runtime_error("elias_omega_decode: bit exhaustion");
    }
    std::uint64_t v = 0;
    for (std::uint64_t i = 0; i < group_len; ++i) {
      v = (v << 1) | static_cast<std::uint64_t>(bits[cursor + i] == '1');
    }
    cursor += group_len;
    n = v;
  }
}

// ---------------------------------------------------------------------------
// PmfModel
// ---------------------------------------------------------------------------

PmfModel::PmfModel(std::vector<std::uint64_t> cutoffs, int precision_bits)
    : cutoffs_(std::move(cutoffs)) {
  if (cutoffs_.empty()) {
    throw std::invalid_argument("PmfModel: empty cutoff vector");
  }
  if (precision_bits < 1 || precision_bits > 63) {
    throw std::invalid_argument("PmfModel: precision_bits out of range");
  }
  max_count_ = (std::uint64_t{1} << precision_bits) - 1;
  const std::uint64_t cap = std::uint64_t{1} << precision_bits;
  n_symbols_ = 1;
  for (std::uint64_t c : cutoffs_) {
    if (c < 1) throw std::invalid_argument("PmfModel: cutoff < 1");
    if (n_symbols_ > cap / (c + 1)) {
      throw std::invalid_argument(
          "PmfModel: alphabet exceeds 2^precision_bits");
    }
    n_symbols_ *= c + 1;
  }
}

std::uint64_t PmfModel::index_of(
    const std::vector<std::uint64_t>& symbol) const {
  if (symbol.size() != cutoffs_.size()) {
    throw std::invalid_argument("PmfModel: symbol length mismatch");
  }
  std::uint64_t idx = 0;
  for (std::size_t i = 0; i < symbol.size(); ++i) {
    if (symbol[i] > cutoffs_[i]) {
      throw std::invalid_argument("PmfModel: symbol exceeds cutoff");
    }
    idx = idx * (cutoffs_[i] + 1) + symbol[i];
  }
  return idx;
}

std::vector<std::uint64_t> PmfModel::symbol_at(std::uint64_t index) const {
  std::vector<std::uint64_t> symbol(cutoffs_.size());
  for (std::size_t i = cutoffs_.size(); i-- > 0;) {
    symbol[i] = index % (cutoffs_[i] + 1);
    index /= cutoffs_[i] + 1;
  }
  return symbol;
}

std::uint64_t PmfModel::rank_of(
    const std::vector<std::uint64_t>& symbol) const {
  const std::uint64_t idx = index_of(symbol);
  const auto it = counts_.find(idx);
  if (it != counts_.end()) {
    const std::uint64_t c = it->second;
    std::uint64_t rank = 1;
    for (const auto& [i, cnt] : counts_) {
      if (cnt > c || (cnt == c && i < idx)) ++rank;
    }
    return rank;
  }
  // Unseen symbols trail the seen ones in lexicographic order.
  const std::uint64_t seen_before = static_cast<std::uint64_t>(
      std::distance(counts_.begin(), counts_.lower_bound(idx)));
  return counts_.size() + (idx - seen_before) + 1;
}

std::vector<std::uint64_t> PmfModel::symbol_of_rank(std::uint64_t rank) const {
  if (rank < 1 || rank > n_symbols_) {
    throw std::runtime_error("PmfModel: rank out of range (desync)");
  }
  if (rank <= counts_.size()) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> order;  // (idx, cnt)
    order.reserve(counts_.size());
    for (const auto& kv : counts_) order.push_back(kv);
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    return symbol_at(order[rank - 1].first);
  }
  // rank - |seen| -th unseen index, in lexicographic order.
  std::uint64_t target = rank - counts_.size() - 1;
  for (const auto& [i, cnt] : counts_) {
    (void)cnt;
    if (i <= target) {
      ++target;
    } else {
      break;
    }
  }
  return symbol_at(target);
}

void PmfModel::update(const std::vector<std::uint64_t>& symbol) {
  const std::uint64_t idx = index_of(symbol);
  auto it = counts_.find(idx);
  if (it != counts_.end() && it->second >= max_count_) {
    // Saturation: floor-halve every count, dropping those that vanish,
    // then credit the observed symbol.
    for (auto i = counts_.begin(); i != counts_.end();) {
      i->second /= 2;
      i = (i->second == 0) ? counts_.erase(i) : std::next(i);
    }
  }
  ++counts_[idx];
}

// ---------------------------------------------------------------------------
// Kalman chain
// ---------------------------------------------------------------------------

namespace detail {

void KalmanChain::init(const DiscretizedModel& dmodel, const Matrix& C_tau,
                       const Matrix& Sigma0) {
  A = dmodel.A_tau;
  W = symmetrize(dmodel.B_tau * dmodel.B_tau.transpose());
  C = C_tau;
  P_prior = symmetrize(Sigma0);
  x_prior = Vector::Zero(A.rows());
}

void KalmanChain::refresh_gain() {
  const int n = static_cast<int>(A.rows());
  const Matrix R = Matrix::Identity(n, n) / 12.0;
  const Matrix S = symmetrize(C * P_prior * C.transpose() + R);
  K = P_prior * C.transpose() * S.llt().solve(Matrix::Identity(n, n));
}

Vector KalmanChain::posterior(const Vector& innovation) const {
  return x_prior + K * innovation;
}

void KalmanChain::advance(const Vector& x_post) {
  const int n = static_cast<int>(A.rows());
  const Matrix I = Matrix::Identity(n, n);
  const Matrix R = I / 12.0;
  const Matrix IKC = I - K * C;
  // Joseph form keeps the posterior covariance symmetric PSD.
  const Matrix P_post = symmetrize(IKC * P_prior * IKC.transpose() +
                                   K * R * K.transpose());
  P_prior = symmetrize(A * P_post * A.transpose() + W);
  x_prior = A * x_post;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Encoder / decoder
// ---------------------------------------------------------------------------

namespace {

std::vector<std::uint64_t> effective_cutoffs(const CodecConfig& cfg) {
  if (!cfg.cutoffs.empty()) return cfg.cutoffs;
  return std::vector<std::uint64_t>(static_cast<std::size_t>(cfg.dmodel.dim()),
                                    15);
}

}  // namespace

DiqEncoder::DiqEncoder(const CodecConfig& config)
    : cfg_(config), pmf_(effective_cutoffs(config), config.precision_bits) {
  chain_.init(cfg_.dmodel, cfg_.C_tau, cfg_.Sigma0);
  replica_post_ = Vector::Zero(cfg_.dmodel.dim());
}

Packet DiqEncoder::encode_step(const Vector& x) {
  const int n = cfg_.dmodel.dim();
  Packet pkt;
  // Escape codes for the previous slot's truncation travel first; the
  // decoder knows how many to expect from that symbol's zero positions.
  for (std::uint64_t v : pending_escapes_) {
    pkt.bits += elias_omega(v).bits;
  }

  const Vector d = dither_at(cfg_.seed, k_, n);
  const Vector z = cfg_.C_tau * (x - chain_.x_prior) + d;
  const std::vector<long long> q = uniform_quantize(z);
  const TruncationResult tr =
      truncate_symbols(wrap_symbols(q), effective_cutoffs(cfg_));

  const std::uint64_t rank = pmf_.rank_of(tr.truncated);
  pkt.bits += nonsingular_codeword(rank).bits;
  pmf_.update(tr.truncated);

  Vector innovation(n);
  for (int i = 0; i < n; ++i) {
    innovation(i) = static_cast<double>(q[static_cast<std::size_t>(i)]) - d(i);
  }
  chain_.refresh_gain();
  const Vector post = chain_.posterior(innovation);
  replica_post_ = tr.escaped.empty() ? post : chain_.x_prior;

  trace_.k = k_;
  trace_.symbol = tr.truncated;
  trace_.rank = rank;
  trace_.bits = pkt.bits;
  trace_.truncated = !tr.escaped.empty();

  chain_.advance(post);
  pending_escapes_ = tr.escaped;
  ++k_;
  return pkt;
}

DiqDecoder::DiqDecoder(const CodecConfig& config)
    : cfg_(config), pmf_(effective_cutoffs(config), config.precision_bits) {
  chain_.init(cfg_.dmodel, cfg_.C_tau, cfg_.Sigma0);
}

Vector DiqDecoder::decode_step(const Packet& packet) {
  const int n = cfg_.dmodel.dim();
  std::size_t cursor = 0;

  if (pending_escape_count_ > 0) {
    // Recover the previous step exactly, then redo its update so the
    // running prior rejoins the encoder's chain.
    std::vector<std::uint64_t> full = held_symbol_;
    for (auto& v : full) {
      if (v == 0) v = elias_omega_decode(packet.bits, cursor);
    }
    const std::vector<long long> q_prev = unwrap_symbols(full);
    const Vector d_prev = dither_at(cfg_.seed, k_ - 1, n);
    Vector innovation(n);
    for (int i = 0; i < n; ++i) {
      innovation(i) =
          static_cast<double>(q_prev[static_cast<std::size_t>(i)]) - d_prev(i);
    }
    const Vector post_prev = held_prior_ + held_gain_ * innovation;
    chain_.x_prior = chain_.A * post_prev;
    pending_escape_count_ = 0;
  }

  // Everything after the escape codes is one non-singular codeword.
  std::uint64_t rank = 1;
  for (std::size_t i = cursor; i < packet.bits.size(); ++i) {
    rank = (rank << 1) | static_cast<std::uint64_t>(packet.bits[i] == '1');
  }
  const std::vector<std::uint64_t> sym = pmf_.symbol_of_rank(rank);
  pmf_.update(sym);

  chain_.refresh_gain();
  Vector out;
  const bool truncated =
      std::find(sym.begin(), sym.end(), std::uint64_t{0}) != sym.end();
  if (truncated) {
    out = chain_.x_prior;  // prediction until the escapes arrive
    pending_escape_count_ = static_cast<std::size_t>(
        std::count(sym.begin(), sym.end(), std::uint64_t{0}));
    held_symbol_ = sym;
    held_prior_ = chain_.x_prior;
    held_gain_ = chain_.K;
    chain_.advance(out);  // covariance bookkeeping; prior fixed on resync
  } else {
    const std::vector<long long> q = unwrap_symbols(sym);
    const Vector d = dither_at(cfg_.seed, k_, n);
    Vector innovation(n);
    for (int i = 0; i < n; ++i) {
      innovation(i) =
          static_cast<double>(q[static_cast<std::size_t>(i)]) - d(i);
    }
    out = chain_.posterior(innovation);
    chain_.advance(out);
  }
  ++k_;
  return out;
}

// ---------------------------------------------------------------------------
// End-to-end run
// ---------------------------------------------------------------------------

EmpiricalPoint run_codec(const StateSpaceModel& model, double Dc, double tau,
                         const CodecRunOptions& options) {
  if (options.steps < 1) {
    throw std::invalid_argument("run_codec: steps < 1");
  }
  const DiscretizedModel dmodel = discretize(model, tau);
  const DtDistortion dd = ct_to_dt_distortion(dmodel, Dc);
  if (!dd.feasible) {
    throw std::invalid_argument(
        "run_codec: distortion below the sampling floor");
  }
  const int n = model.dim();

  CodecConfig cfg;
  cfg.dmodel = dmodel;
  cfg.C_tau = design_quantizer_sensor(dmodel, dd.value, dmodel.Q_bar);
  cfg.Sigma0 = model.Sigma0;
  cfg.cutoffs = options.cutoffs;
  cfg.precision_bits = options.precision_bits;
  cfg.seed = options.seed;

  DiqEncoder enc(cfg);
  DiqDecoder dec(cfg);

  // Streams n..2n-1 drive the plant, stream 2n the initial condition;
  // 0..n-1 are reserved for the dither.
  const Matrix S0_root = psd_sqrt(model.Sigma0);
  CounterRng init_rng(options.seed, 2 * static_cast<std::uint64_t>(n));
  Vector x(n);
  for (int i = 0; i < n; ++i) {
    x(i) = init_rng.normal(static_cast<std::uint64_t>(i));
  }
  x = S0_root * x;

  double mse_integral = 0.0;
  std::uint64_t total_bits = 0;
  for (long k = 0; k < options.steps; ++k) {
    const Packet pkt = enc.encode_step(x);
    const Vector est = dec.decode_step(pkt);
    total_bits += pkt.length();

    const Vector e = x - est;
    mse_integral += interval_mse(dmodel, e * e.transpose());

    if (options.trace != nullptr) {
      const StepTrace& t = enc.last_trace();
      *options.trace << t.k << ' ';
      for (std::size_t i = 0; i < t.symbol.size(); ++i) {
        if (i) *options.trace << ',';
        *options.trace << t.symbol[i];
      }
      *options.trace << ' ' << t.rank << ' '
                     << (t.bits.empty() ? "-" : t.bits) << ' '
                     << (t.truncated ? 1 : 0) << '\n';
    }

    Vector w(n);
    for (int i = 0; i < n; ++i) {
      w(i) = CounterRng(options.seed, static_cast<std::uint64_t>(n + i))
                 .normal(static_cast<std::uint64_t>(k));
    }
    x = dmodel.A_tau * x + dmodel.B_tau * w;
  }

  const double T = options.steps * tau;
  EmpiricalPoint pt;
  pt.n_steps = options.steps;
  pt.n_events = static_cast<long>(total_bits);
  pt.rate = static_cast<double>(total_bits) / T;
  pt.mse = mse_integral / T;
  return pt;
}

}  // namespace evtrack
