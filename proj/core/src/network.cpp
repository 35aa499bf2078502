#include "ivs/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "ivs/errors.hpp"
#include "ivs/rng.hpp"

namespace ivs {

std::vector<int> Architecture::stage_sizes() const {
  std::vector<int> sizes;
  int n = input_size;
  for (const auto& c : convs) {
    n = (n - c.kernel + 1) / 2;
    sizes.push_back(n);
  }
  return sizes;
}

int Architecture::feature_size() const {
  const auto s = stage_sizes();
  const int n = s.empty() ? input_size : s.back();
  const int c = convs.empty() ? input_channels : convs.back().channels;
  return n * n * c;
}

std::size_t Architecture::parameter_count() const {
  std::size_t total = 0;
  int cin = input_channels;
  for (const auto& c : convs) {
    total += static_cast<std::size_t>(c.channels) * cin * c.kernel * c.kernel + c.channels;
    cin = c.channels;
  }
  const std::size_t f = feature_size();
  total += 2 * (hidden * f + hidden + 3 * hidden + 3);
  return total;
}

void Architecture::validate() const {
  if (input_size < 1 || input_channels < 1 || hidden < 1)
    throw Error("architecture: sizes must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw Error("architecture: dropout must be in [0, 1)");
  int n = input_size;
  for (const auto& c : convs) {
    if (c.kernel < 1 || c.channels < 1) throw Error("architecture: bad conv spec");
    n = n - c.kernel + 1;
    if (n < 2) throw Error("architecture: input too small for conv stack");
    n /= 2;
  }
}

template <class S>
std::vector<S> to_input(const Image& img) {
  if (!img.valid()) throw Error("to_input: malformed image");
  const std::size_t plane = static_cast<std::size_t>(img.width) * img.height;
  std::vector<S> out(3 * plane);
  // Centered on the board color, so an empty board is all zeros.
  constexpr int kCenter[3] = {200, 30, 30};
  for (std::size_t i = 0; i < plane; ++i)
    for (int c = 0; c < 3; ++c)
      out[c * plane + i] = static_cast<S>(static_cast<int>(img.pixels[3 * i + c]) - kCenter[c]) / S(64);
  return out;
}

namespace {

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <class S>
using MapM = Eigen::Map<const Mat<S>>;
template <class S>
using MapV = Eigen::Map<const Vec<S>>;

// Output positions are processed in column blocks so the unfolded input
// stays cache resident.
inline constexpr int kColBlock = 1024;

// cols(c*k*k + ki*k + kj, q - q0) = x(c, i+ki, j+kj) for q = i*no + j in [q0, q1)
template <class S>
void im2col(const S* x, int cin, int n, int k, int q0, int q1, Mat<S>& cols) {
  const int no = n - k + 1;
  cols.resize(static_cast<Eigen::Index>(cin) * k * k, q1 - q0);
  for (int c = 0; c < cin; ++c)
    for (int ki = 0; ki < k; ++ki)
      for (int kj = 0; kj < k; ++kj) {
        S* dst = cols.row((c * k + ki) * k + kj).data();
        const S* src = x + static_cast<std::size_t>(c) * n * n + static_cast<std::size_t>(ki) * n + kj;
        for (int q = q0; q < q1;) {
          const int i = q / no, j = q % no;
          const int len = std::min(no - j, q1 - q);
          std::copy_n(src + static_cast<std::size_t>(i) * n + j, len, dst + (q - q0));
          q += len;
        }
      }
}

// Adjoint of im2col: accumulates the block into dx.
template <class S>
void col2im(const Mat<S>& dcols, int cin, int n, int k, int q0, int q1, S* dx) {
  const int no = n - k + 1;
  for (int c = 0; c < cin; ++c)
    for (int ki = 0; ki < k; ++ki)
      for (int kj = 0; kj < k; ++kj) {
        const S* src = dcols.row((c * k + ki) * k + kj).data();
        S* dst = dx + static_cast<std::size_t>(c) * n * n + static_cast<std::size_t>(ki) * n + kj;
        for (int q = q0; q < q1;) {
          const int i = q / no, j = q % no;
          const int len = std::min(no - j, q1 - q);
          S* d = dst + static_cast<std::size_t>(i) * n + j;
          const S* sv = src + (q - q0);
          for (int t = 0; t < len; ++t) d[t] += sv[t];
          q += len;
        }
      }
}

template <class S>
struct StageCache {
  Mat<S> pooled;            // channels x (np*np)
  std::vector<int> argmax;  // flat index into z's row for each pooled cell
  int n_in = 0, n_out = 0, n_pool = 0;
};

template <class S>
struct ForwardCache {
  std::vector<StageCache<S>> stages;
  Vec<S> feat, hpre, h, mask, hd, out;
};

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

template <class S>
Vec<S> dropout_mask(int n, double rate, std::uint64_t seed, std::uint64_t index) {
  Vec<S> m(n);
  Rng rng = make_rng(seed, {stream::dropout, index});
  std::bernoulli_distribution keep(1.0 - rate);
  const S scale = static_cast<S>(1.0 / (1.0 - rate));
  for (int i = 0; i < n; ++i) m[i] = keep(rng) ? scale : S(0);
  return m;
}

}  // namespace

template <class S>
Network<S>::Network(Architecture arch) : arch_(std::move(arch)) {
  arch_.validate();
  std::size_t off = 0;
  auto take = [&](std::size_t n) {
    Slice s{off, n};
    off += n;
    return s;
  };
  int cin = arch_.input_channels;
  for (const auto& c : arch_.convs) {
    conv_w_.push_back(take(static_cast<std::size_t>(c.channels) * cin * c.kernel * c.kernel));
    conv_b_.push_back(take(c.channels));
    cin = c.channels;
  }
  const std::size_t f = arch_.feature_size();
  for (auto& h : heads_) {
    h.w1 = take(arch_.hidden * f);
    h.b1 = take(arch_.hidden);
    h.w2 = take(3 * static_cast<std::size_t>(arch_.hidden));
    h.b2 = take(3);
  }
  params_.assign(off, S(0));
}

template <class S>
std::size_t Network<S>::conv_parameter_count() const {
  return conv_w_.empty() ? 0 : conv_b_.back().offset + conv_b_.back().size;
}

template <class S>
void Network<S>::init(std::uint64_t seed) {
  Rng rng = make_rng(seed, {stream::init});
  std::fill(params_.begin(), params_.end(), S(0));
  auto glorot = [&](Slice s, double fan_in, double fan_out) {
    const double a = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> u(-a, a);
    for (std::size_t i = 0; i < s.size; ++i) params_[s.offset + i] = static_cast<S>(u(rng));
  };
  int cin = arch_.input_channels;
  for (std::size_t l = 0; l < arch_.convs.size(); ++l) {
    const auto& c = arch_.convs[l];
    const double k2 = c.kernel * c.kernel;
    glorot(conv_w_[l], cin * k2, c.channels * k2);
    cin = c.channels;
  }
  const double f = arch_.feature_size();
  for (const auto& h : heads_) {
    glorot(h.w1, f, arch_.hidden);
    glorot(h.w2, arch_.hidden, 3);
  }
}

namespace {

template <class S>
void run_forward(const Network<S>& net, std::span<const S> input, Subtask subtask, bool train,
                 std::uint64_t seed, std::uint64_t index, ForwardCache<S>& fc, bool features_only = false) {
  const Architecture& a = net.arch();
  const std::size_t expect = static_cast<std::size_t>(a.input_channels) * a.input_size * a.input_size;
  if (input.size() != expect)
    throw Error("network input has " + std::to_string(input.size()) + " values, expected " +
                std::to_string(expect));
  const auto& P = net.params();
  fc.stages.resize(a.convs.size());
  const S* x = input.data();
  int n = a.input_size;
  int cin = a.input_channels;
  for (std::size_t l = 0; l < a.convs.size(); ++l) {
    auto& st = fc.stages[l];
    const int k = a.convs[l].kernel;
    const int cout = a.convs[l].channels;
    st.n_in = n;
    st.n_out = n - k + 1;
    st.n_pool = st.n_out / 2;
    const auto ws = net.conv_weights(static_cast<int>(l));
    const auto bs = net.conv_bias(static_cast<int>(l));
    MapM<S> W(P.data() + ws.offset, cout, static_cast<Eigen::Index>(cin) * k * k);
    MapV<S> b(P.data() + bs.offset, cout);
    const int nq = st.n_out * st.n_out;
    // Pre-activation conv output; only its pooled maxima are kept.
    thread_local std::vector<Mat<S>> zbuf;
    if (zbuf.size() <= l) zbuf.resize(l + 1);
    Mat<S>& z = zbuf[l];
    z.resize(cout, nq);
    thread_local Mat<S> cols;
    for (int q0 = 0; q0 < nq; q0 += kColBlock) {
      const int q1 = std::min(nq, q0 + kColBlock);
      im2col(x, cin, n, k, q0, q1, cols);
      z.middleCols(q0, q1 - q0).noalias() = W * cols;
    }
    // Bias and ReLU commute with the max, so they are applied after pooling.
    const int no = st.n_out, np = st.n_pool;
    st.pooled.resize(cout, static_cast<Eigen::Index>(np) * np);
    st.argmax.resize(static_cast<std::size_t>(cout) * np * np);
    for (int c = 0; c < cout; ++c) {
      const S* zr = z.row(c).data();
      S* pr = st.pooled.row(c).data();
      int* am = st.argmax.data() + static_cast<std::size_t>(c) * np * np;
      const S bc = b[c];
      for (int i = 0; i < np; ++i) {
        const S* r0 = zr + (2 * i) * no;
        const S* r1 = r0 + no;
        for (int j = 0; j < np; ++j) {
          int best = 2 * j;
          S m = r0[best];
          if (r0[2 * j + 1] > m) m = r0[best = 2 * j + 1];
          if (r1[2 * j] > m) m = r1[2 * j], best = no + 2 * j;
          if (r1[2 * j + 1] > m) m = r1[2 * j + 1], best = no + 2 * j + 1;
          pr[i * np + j] = std::max(m + bc, S(0));
          am[i * np + j] = (2 * i) * no + best;
        }
      }
    }
    x = st.pooled.data();
    n = np;
    cin = cout;
  }
  fc.feat = Eigen::Map<const Vec<S>>(x, static_cast<Eigen::Index>(cin) * n * n);
  if (features_only) return;
  const auto& h = net.head(subtask);
  const int H = a.hidden;
  const Eigen::Index F = fc.feat.size();
  MapM<S> W1(P.data() + h.w1.offset, H, F);
  MapV<S> b1(P.data() + h.b1.offset, H);
  MapM<S> W2(P.data() + h.w2.offset, 3, H);
  MapV<S> b2(P.data() + h.b2.offset, 3);
  fc.hpre.noalias() = W1 * fc.feat;
  fc.hpre += b1;
  fc.h = fc.hpre.cwiseMax(S(0));
  if (train && a.dropout > 0.0) {
    fc.mask = dropout_mask<S>(H, a.dropout, seed, index);
    fc.hd = fc.h.cwiseProduct(fc.mask);
  } else {
    fc.mask = Vec<S>::Ones(H);
    fc.hd = fc.h;
  }
  fc.out.noalias() = W2 * fc.hd;
  fc.out += b2;
}

}  // namespace

template <class S>
NetOutput Network<S>::forward(std::span<const S> input, Subtask subtask, Mode mode,
                              std::uint64_t dropout_seed) const {
  ForwardCache<S> fc;
  run_forward(*this, input, subtask, mode == Mode::train, dropout_seed, 0, fc);
  NetOutput o;
  o.action = {static_cast<double>(fc.out[0]), static_cast<double>(fc.out[1])};
  o.logit = static_cast<double>(fc.out[2]);
  o.phi_prob = std::clamp(sigmoid(o.logit), kProbClamp, 1.0 - kProbClamp);
  return o;
}

template <class S>
NetOutput Network<S>::forward(const Image& img, Subtask subtask) const {
  if (img.width != arch_.input_size || img.height != arch_.input_size)
    throw Error("network expects a " + std::to_string(arch_.input_size) + "x" +
                std::to_string(arch_.input_size) + " image, got " + std::to_string(img.width) + "x" +
                std::to_string(img.height));
  const auto in = to_input<S>(img);
  return forward(std::span<const S>(in), subtask, Mode::eval);
}

template <class S>
std::vector<S> Network<S>::features(std::span<const S> input) const {
  ForwardCache<S> fc;
  run_forward(*this, input, Subtask::pick, false, 0, 0, fc, true);
  return {fc.feat.data(), fc.feat.data() + fc.feat.size()};
}

template <class S>
double Network<S>::loss_and_gradient(std::span<const Example<S>* const> batch, Subtask subtask,
                                     double mu, Mode mode, std::uint64_t dropout_seed,
                                     std::vector<S>* grad) const {
  if (batch.empty()) throw Error("loss over an empty batch");
  if (grad && grad->size() != params_.size()) grad->assign(params_.size(), S(0));
  using ColMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index B = static_cast<Eigen::Index>(batch.size());
  const double inv_b = 1.0 / static_cast<double>(B);
  const bool train = mode == Mode::train && arch_.dropout > 0.0;
  const auto& h = head(subtask);
  const int H = arch_.hidden;
  const Eigen::Index F = arch_.feature_size();
  const S* P = params_.data();

  // Conv stacks per example; the dense head runs on the whole batch at once.
  std::vector<ForwardCache<S>> fcs(batch.size());
  ColMat feat(F, B);
  for (Eigen::Index e = 0; e < B; ++e) {
    run_forward(*this, std::span<const S>(batch[e]->input), subtask, false, 0, 0, fcs[e], true);
    feat.col(e) = fcs[e].feat;
  }
  MapM<S> W1(P + h.w1.offset, H, F);
  MapV<S> b1(P + h.b1.offset, H);
  MapM<S> W2(P + h.w2.offset, 3, H);
  MapV<S> b2(P + h.b2.offset, 3);
  ColMat hpre = W1 * feat;
  hpre.colwise() += b1;
  ColMat mask = ColMat::Ones(H, B);
  if (train)
    for (Eigen::Index e = 0; e < B; ++e)
      mask.col(e) = dropout_mask<S>(H, arch_.dropout, dropout_seed, static_cast<std::uint64_t>(e));
  const ColMat hd = hpre.cwiseMax(S(0)).cwiseProduct(mask);
  ColMat out = W2 * hd;
  out.colwise() += b2;

  double total = 0.0;
  ColMat dout(3, B);
  for (Eigen::Index e = 0; e < B; ++e) {
    const Example<S>& ex = *batch[e];
    const double dx = static_cast<double>(out(0, e)) - ex.action.x;
    const double dy = static_cast<double>(out(1, e)) - ex.action.y;
    const double p = sigmoid(static_cast<double>(out(2, e)));
    const double pc = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
    const double phi = ex.termination ? 1.0 : 0.0;
    const double ce = -(phi * std::log(pc) + (1.0 - phi) * std::log(1.0 - pc));
    total += (dx * dx + dy * dy + mu * ce) * inv_b;
    dout(0, e) = static_cast<S>(2.0 * dx * inv_b);
    dout(1, e) = static_cast<S>(2.0 * dy * inv_b);
    dout(2, e) = (p == pc) ? static_cast<S>(mu * (p - phi) * inv_b) : S(0);
  }
  if (!grad) return total;

  S* G = grad->data();
  Eigen::Map<Mat<S>> gW2(G + h.w2.offset, 3, H);
  Eigen::Map<Vec<S>> gb2(G + h.b2.offset, 3);
  gW2.noalias() += dout * hd.transpose();
  gb2 += dout.rowwise().sum();
  ColMat dh = (W2.transpose() * dout).cwiseProduct(mask);
  dh = (hpre.array() > S(0)).select(dh, S(0));
  Eigen::Map<Mat<S>> gW1(G + h.w1.offset, H, F);
  Eigen::Map<Vec<S>> gb1(G + h.b1.offset, H);
  gW1.noalias() += dh * feat.transpose();
  gb1 += dh.rowwise().sum();
  const ColMat dfeat = W1.transpose() * dh;

  Mat<S> cols, dcols;
  std::vector<Mat<S>> dzbuf(arch_.convs.size());
  for (Eigen::Index e = 0; e < B; ++e) {
    ForwardCache<S>& fc = fcs[e];
    // dfeat has the layout of the last pooled map.
    Mat<S> dpooled = Eigen::Map<const Mat<S>>(dfeat.col(e).data(), arch_.convs.back().channels,
                                              static_cast<Eigen::Index>(fc.stages.back().n_pool) *
                                                  fc.stages.back().n_pool);
    for (int l = static_cast<int>(arch_.convs.size()) - 1; l >= 0; --l) {
      auto& st = fc.stages[l];
      const int k = arch_.convs[l].kernel;
      const int cout = arch_.convs[l].channels;
      const int cin = l == 0 ? arch_.input_channels : arch_.convs[l - 1].channels;
      const int np = st.n_pool;
      // Gradient flows through the argmax of each window whose output is positive.
      Mat<S>& dz = dzbuf[l];
      dz.setZero(cout, static_cast<Eigen::Index>(st.n_out) * st.n_out);
      for (int c = 0; c < cout; ++c) {
        const int* am = st.argmax.data() + static_cast<std::size_t>(c) * np * np;
        const S* pr = st.pooled.row(c).data();
        for (int q = 0; q < np * np; ++q)
          if (pr[q] > S(0)) dz(c, am[q]) = dpooled(c, q);
      }
      const S* stage_in = l == 0 ? batch[e]->input.data() : fc.stages[l - 1].pooled.data();
      const auto ws = conv_weights(l);
      const auto bs = conv_bias(l);
      const Eigen::Index K = static_cast<Eigen::Index>(cin) * k * k;
      Eigen::Map<Mat<S>> gW(G + ws.offset, cout, K);
      Eigen::Map<Vec<S>> gb(G + bs.offset, cout);
      MapM<S> W(P + ws.offset, cout, K);
      gb += dz.rowwise().sum();
      Mat<S> dx_prev;
      if (l > 0) dx_prev = Mat<S>::Zero(cin, static_cast<Eigen::Index>(st.n_in) * st.n_in);
      const int nq = st.n_out * st.n_out;
      for (int q0 = 0; q0 < nq; q0 += kColBlock) {
        const int q1 = std::min(nq, q0 + kColBlock);
        im2col(stage_in, cin, st.n_in, k, q0, q1, cols);
        const auto dzb = dz.middleCols(q0, q1 - q0);
        gW.noalias() += dzb * cols.transpose();
        if (l == 0) continue;
        dcols.noalias() = W.transpose() * dzb;
        col2im(dcols, cin, st.n_in, k, q0, q1, dx_prev.data());
      }
      if (l == 0) break;
      dpooled = std::move(dx_prev);
    }
  }
  return total;
}

template class Network<float>;
template class Network<double>;
template std::vector<float> to_input<float>(const Image&);
template std::vector<double> to_input<double>(const Image&);

}  // namespace ivs
