#include "memcurse/models/cells.hpp"

#include <cmath>

#include "memcurse/errors.hpp"

namespace memcurse::models {

namespace {

using cd = std::complex<double>;

Eigen::Index check_inputs(const TimeSeries& x, Eigen::Index dim) {
  if (x.empty()) throw DimensionError("forward: empty input sequence");
  const Eigen::Index batch = x[0].cols();
  for (const auto& xt : x)
    if (xt.rows() != dim || xt.cols() != batch)
      throw DimensionError("input dimension mismatch: expected " + std::to_string(dim) + " rows");
  return batch;
}

void check_errors(const TimeSeries& e, const Trajectory& traj, Eigen::Index out_dim) {
  if (e.size() != traj.outputs.size())
    throw DimensionError("output_errors length does not match the trajectory");
  for (std::size_t t = 0; t < e.size(); ++t)
    if (e[t].rows() != out_dim || e[t].cols() != traj.outputs[t].cols())
      throw DimensionError("output_errors shape does not match outputs");
}

Eigen::MatrixXd flat_row(const Eigen::VectorXd& v) { return v; }

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) {
  return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

}  // namespace

TimeSeries to_time_major(const stochastic::SequenceBatch& batch) {
  TimeSeries out(batch.length, Eigen::MatrixXd(batch.dim, batch.count));
  for (std::size_t s = 0; s < batch.count; ++s)
    for (std::size_t t = 0; t < batch.length; ++t)
      for (std::size_t d = 0; d < batch.dim; ++d)
        out[t](static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(s)) = batch(s, t, d);
  return out;
}

stochastic::SequenceBatch from_time_major(const TimeSeries& series) {
  if (series.empty()) return {};
  const auto dim = static_cast<std::size_t>(series[0].rows());
  const auto count = static_cast<std::size_t>(series[0].cols());
  stochastic::SequenceBatch b(count, series.size(), dim);
  for (std::size_t s = 0; s < count; ++s)
    for (std::size_t t = 0; t < series.size(); ++t)
      for (std::size_t d = 0; d < dim; ++d)
        b(s, t, d) = series[t](static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(s));
  return b;
}

// ---------------------------------------------------------------- dense

void DenseLinearSSM::validate() const {
  const auto n = A.rows();
  if (A.cols() != n || B.rows() != n || C.cols() != n || D.rows() != C.rows() ||
      D.cols() != B.cols())
    throw DimensionError("DenseLinearSSM: inconsistent A/B/C/D shapes");
}

Trajectory DenseLinearSSM::forward(const TimeSeries& x) const {
  validate();
  const Eigen::Index batch = check_inputs(x, input_dim());
  Trajectory tr;
  tr.states.resize(x.size() + 1);
  tr.outputs.resize(x.size());
  tr.states[0] = Eigen::MatrixXd::Zero(state_dim(), batch);
  for (std::size_t t = 0; t < x.size(); ++t) {
    tr.states[t + 1].noalias() = A * tr.states[t];
    tr.states[t + 1].noalias() += B * x[t];
    tr.outputs[t].noalias() = C * tr.states[t + 1];
    tr.outputs[t].noalias() += D * x[t];
  }
  return tr;
}

BackwardResult DenseLinearSSM::backward(const TimeSeries& x, const Trajectory& tr,
                                        const TimeSeries& e) const {
  check_errors(e, tr, output_dim());
  const Eigen::Index batch = x[0].cols();
  Eigen::MatrixXd dA = Eigen::MatrixXd::Zero(A.rows(), A.cols());
  Eigen::MatrixXd dB = Eigen::MatrixXd::Zero(B.rows(), B.cols());
  Eigen::MatrixXd dC = Eigen::MatrixXd::Zero(C.rows(), C.cols());
  Eigen::MatrixXd dD = Eigen::MatrixXd::Zero(D.rows(), D.cols());
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(state_dim(), batch);
  Eigen::MatrixXd tmp;
  BackwardResult out;
  out.input_errors.resize(x.size());
  for (std::size_t t = x.size(); t-- > 0;) {
    tmp.noalias() = A.transpose() * g;
    g.noalias() = C.transpose() * e[t];
    g += tmp;
    dA.noalias() += g * tr.states[t].transpose();
    dB.noalias() += g * x[t].transpose();
    dC.noalias() += e[t] * tr.states[t + 1].transpose();
    dD.noalias() += e[t] * x[t].transpose();
    out.input_errors[t].noalias() = B.transpose() * g;
    out.input_errors[t].noalias() += D.transpose() * e[t];
  }
  out.gradients.add("A", std::move(dA));
  out.gradients.add("B", std::move(dB));
  out.gradients.add("C", std::move(dC));
  out.gradients.add("D", std::move(dD));
  return out;
}

GradientBundle DenseLinearSSM::parameters() const {
  GradientBundle p;
  p.add("A", A);
  p.add("B", B);
  p.add("C", C);
  p.add("D", D);
  return p;
}

void DenseLinearSSM::set_parameters(const Eigen::VectorXd& flat) {
  GradientBundle p = parameters();
  p.unflatten(flat);
  A = p["A"];
  B = p["B"];
  C = p["C"];
  D = p["D"];
}

// ------------------------------------------------------- block diagonal

void BlockDiagonalCell::validate() const {
  const auto n = state_dim();
  if (blocks.cols() != 4 || B.rows() != n || C.cols() != n || D.rows() != C.rows() ||
      D.cols() != B.cols())
    throw DimensionError("BlockDiagonalCell: inconsistent shapes");
}

Eigen::MatrixXd BlockDiagonalCell::recurrence() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(state_dim(), state_dim());
  for (Eigen::Index k = 0; k < blocks.rows(); ++k) {
    a(2 * k, 2 * k) = blocks(k, 0);
    a(2 * k, 2 * k + 1) = blocks(k, 1);
    a(2 * k + 1, 2 * k) = blocks(k, 2);
    a(2 * k + 1, 2 * k + 1) = blocks(k, 3);
  }
  return a;
}

namespace {

// out = blockdiag(blocks) * h (or its transpose).
void apply_blocks(const Eigen::MatrixXd& blocks, const Eigen::MatrixXd& h, Eigen::MatrixXd& out,
                  bool transpose) {
  out.resize(h.rows(), h.cols());
  for (Eigen::Index k = 0; k < blocks.rows(); ++k) {
    const double a00 = blocks(k, 0), a11 = blocks(k, 3);
    const double a01 = transpose ? blocks(k, 2) : blocks(k, 1);
    const double a10 = transpose ? blocks(k, 1) : blocks(k, 2);
    out.row(2 * k) = a00 * h.row(2 * k) + a01 * h.row(2 * k + 1);
    out.row(2 * k + 1) = a10 * h.row(2 * k) + a11 * h.row(2 * k + 1);
  }
}

}  // namespace

Trajectory BlockDiagonalCell::forward(const TimeSeries& x) const {
  validate();
  const Eigen::Index batch = check_inputs(x, input_dim());
  Trajectory tr;
  tr.states.resize(x.size() + 1);
  tr.outputs.resize(x.size());
  tr.states[0] = Eigen::MatrixXd::Zero(state_dim(), batch);
  for (std::size_t t = 0; t < x.size(); ++t) {
    apply_blocks(blocks, tr.states[t], tr.states[t + 1], false);
    tr.states[t + 1].noalias() += B * x[t];
    tr.outputs[t].noalias() = C * tr.states[t + 1];
    tr.outputs[t].noalias() += D * x[t];
  }
  return tr;
}

BackwardResult BlockDiagonalCell::backward(const TimeSeries& x, const Trajectory& tr,
                                           const TimeSeries& e) const {
  check_errors(e, tr, output_dim());
  const Eigen::Index batch = x[0].cols();
  Eigen::MatrixXd dblk = Eigen::MatrixXd::Zero(blocks.rows(), 4);
  Eigen::MatrixXd dB = Eigen::MatrixXd::Zero(B.rows(), B.cols());
  Eigen::MatrixXd dC = Eigen::MatrixXd::Zero(C.rows(), C.cols());
  Eigen::MatrixXd dD = Eigen::MatrixXd::Zero(D.rows(), D.cols());
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(state_dim(), batch);
  Eigen::MatrixXd tmp;
  BackwardResult out;
  out.input_errors.resize(x.size());
  for (std::size_t t = x.size(); t-- > 0;) {
    apply_blocks(blocks, g, tmp, true);
    g.noalias() = C.transpose() * e[t];
    g += tmp;
    const Eigen::MatrixXd& hp = tr.states[t];
    for (Eigen::Index k = 0; k < blocks.rows(); ++k) {
      const auto g0 = g.row(2 * k), g1 = g.row(2 * k + 1);
      const auto h0 = hp.row(2 * k), h1 = hp.row(2 * k + 1);
      dblk(k, 0) += g0.dot(h0);
      dblk(k, 1) += g0.dot(h1);
      dblk(k, 2) += g1.dot(h0);
      dblk(k, 3) += g1.dot(h1);
    }
    dB.noalias() += g * x[t].transpose();
    dC.noalias() += e[t] * tr.states[t + 1].transpose();
    dD.noalias() += e[t] * x[t].transpose();
    out.input_errors[t].noalias() = B.transpose() * g;
    out.input_errors[t].noalias() += D.transpose() * e[t];
  }
  out.gradients.add("blocks", std::move(dblk));
  out.gradients.add("B", std::move(dB));
  out.gradients.add("C", std::move(dC));
  out.gradients.add("D", std::move(dD));
  return out;
}

GradientBundle BlockDiagonalCell::parameters() const {
  GradientBundle p;
  p.add("blocks", blocks);
  p.add("B", B);
  p.add("C", C);
  p.add("D", D);
  return p;
}

void BlockDiagonalCell::set_parameters(const Eigen::VectorXd& flat) {
  GradientBundle p = parameters();
  p.unflatten(flat);
  blocks = p["blocks"];
  B = p["B"];
  C = p["C"];
  D = p["D"];
}

// ------------------------------------------------------ complex diagonal

DiagonalComplexCell DiagonalComplexCell::cartesian(const Eigen::VectorXcd& lambda,
                                                   Eigen::MatrixXcd b, Eigen::MatrixXcd c,
                                                   Eigen::MatrixXd d,
                                                   analytic::NormalizationSpec norm) {
  DiagonalComplexCell cell;
  cell.coords = Coordinates::Cartesian;
  cell.p1 = lambda.real();
  cell.p2 = lambda.imag();
  cell.b = std::move(b);
  cell.c = std::move(c);
  cell.d = std::move(d);
  cell.norm = std::move(norm);
  cell.validate();
  return cell;
}

DiagonalComplexCell DiagonalComplexCell::polar(const Eigen::VectorXcd& lambda,
                                               analytic::Parametrization magnitude,
                                               analytic::Parametrization angle,
                                               Eigen::MatrixXcd b, Eigen::MatrixXcd c,
                                               Eigen::MatrixXd d,
                                               analytic::NormalizationSpec norm) {
  if (magnitude.is_angle() || !angle.is_angle())
    throw DomainError("polar cell needs a magnitude map and an angle map");
  DiagonalComplexCell cell;
  cell.coords = Coordinates::Polar;
  cell.magnitude = magnitude;
  cell.angle = angle;
  const Eigen::Index m = lambda.size();
  cell.p1.resize(m);
  cell.p2.resize(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double nu = std::abs(lambda(k));
    const double theta = std::arg(lambda(k));
    cell.p1(k) = magnitude.inverse(nu);
    cell.p2(k) = angle.inverse(theta, magnitude.value(cell.p1(k)));
  }
  cell.b = std::move(b);
  cell.c = std::move(c);
  cell.d = std::move(d);
  cell.norm = std::move(norm);
  cell.validate();
  return cell;
}

DiagonalComplexCell make_lru(const Eigen::VectorXcd& lambda, Eigen::MatrixXcd b,
                             Eigen::MatrixXcd c, Eigen::MatrixXd d, bool stop_gradient) {
  return DiagonalComplexCell::polar(
      lambda, analytic::Parametrization(analytic::ParamKind::DoubleExp),
      analytic::Parametrization(analytic::ParamKind::PolarExpAngle), std::move(b), std::move(c),
      std::move(d), analytic::NormalizationSpec::sqrt_one_minus_nu_sq(stop_gradient));
}

bool DiagonalComplexCell::is_lru() const {
  return coords == Coordinates::Polar && magnitude.kind() == analytic::ParamKind::DoubleExp &&
         angle.kind() == analytic::ParamKind::PolarExpAngle &&
         norm.kind == analytic::NormalizationSpec::Kind::SqrtOneMinusNuSq;
}

void DiagonalComplexCell::validate() const {
  const auto m = p1.size();
  if (p2.size() != m || b.rows() != m || c.cols() != m || d.rows() != c.rows() ||
      d.cols() != b.cols())
    throw DimensionError("DiagonalComplexCell: inconsistent shapes");
}

Eigen::VectorXcd DiagonalComplexCell::lambda() const {
  Eigen::VectorXcd l(p1.size());
  for (Eigen::Index k = 0; k < p1.size(); ++k) {
    if (coords == Coordinates::Cartesian) {
      l(k) = cd(p1(k), p2(k));
    } else {
      const double nu = magnitude.value(p1(k));
      l(k) = std::polar(1.0, angle.value(p2(k), nu)) * nu;
    }
  }
  return l;
}

Eigen::VectorXd DiagonalComplexCell::gamma() const {
  const Eigen::VectorXcd l = lambda();
  Eigen::VectorXd g(l.size());
  for (Eigen::Index k = 0; k < l.size(); ++k) g(k) = norm.gamma(std::abs(l(k)));
  return g;
}

Trajectory DiagonalComplexCell::forward(const TimeSeries& x) const {
  return forward_with_gammas(x, gamma());
}

Trajectory DiagonalComplexCell::forward_with_gammas(const TimeSeries& x,
                                                    const Eigen::VectorXd& g) const {
  validate();
  const Eigen::Index batch = check_inputs(x, input_dim());
  const Eigen::VectorXcd l = lambda();
  const Eigen::MatrixXcd gb = g.cast<cd>().asDiagonal() * b;
  Trajectory tr;
  tr.complex_states.resize(x.size() + 1);
  tr.outputs.resize(x.size());
  tr.complex_states[0] = Eigen::MatrixXcd::Zero(state_dim(), batch);
  for (std::size_t t = 0; t < x.size(); ++t) {
    Eigen::MatrixXcd& h = tr.complex_states[t + 1];
    h.noalias() = gb * x[t].cast<cd>();
    h += l.asDiagonal() * tr.complex_states[t];
    tr.outputs[t].noalias() = (c * h).real();
    tr.outputs[t].noalias() += d * x[t];
  }
  return tr;
}

BackwardResult DiagonalComplexCell::backward(const TimeSeries& x, const Trajectory& tr,
                                             const TimeSeries& e) const {
  check_errors(e, tr, output_dim());
  const Eigen::Index m = state_dim();
  const Eigen::Index batch = x[0].cols();
  const Eigen::VectorXcd l = lambda();
  const Eigen::VectorXcd lc = l.conjugate();
  const Eigen::VectorXd g = gamma();
  const Eigen::MatrixXcd c_adj = c.adjoint();
  const Eigen::MatrixXcd b_adj = b.adjoint();

  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(m, batch);
  Eigen::VectorXcd q = Eigen::VectorXcd::Zero(m);
  Eigen::VectorXcd s = Eigen::VectorXcd::Zero(m);
  Eigen::MatrixXcd gB = Eigen::MatrixXcd::Zero(b.rows(), b.cols());
  Eigen::MatrixXd dCre = Eigen::MatrixXd::Zero(c.rows(), c.cols());
  Eigen::MatrixXd dCim = Eigen::MatrixXd::Zero(c.rows(), c.cols());
  Eigen::MatrixXd dD = Eigen::MatrixXd::Zero(d.rows(), d.cols());
  const bool gamma_path =
      !norm.stop_gradient && norm.kind != analytic::NormalizationSpec::Kind::None;

  BackwardResult out;
  out.input_errors.resize(x.size());
  Eigen::MatrixXcd ga, bx;
  for (std::size_t t = x.size(); t-- > 0;) {
    const Eigen::MatrixXcd et = e[t].cast<cd>();
    const Eigen::MatrixXcd xt = x[t].cast<cd>();
    a = lc.asDiagonal() * a;
    a.noalias() += c_adj * et;
    q += a.conjugate().cwiseProduct(tr.complex_states[t]).rowwise().sum();
    if (gamma_path) {
      bx.noalias() = b * xt;
      s += a.conjugate().cwiseProduct(bx).rowwise().sum();
    }
    ga = g.cast<cd>().asDiagonal() * a;
    gB.noalias() += ga * xt.transpose();
    const Eigen::MatrixXcd& h = tr.complex_states[t + 1];
    dCre.noalias() += e[t] * h.real().transpose();
    dCim.noalias() -= e[t] * h.imag().transpose();
    dD.noalias() += e[t] * x[t].transpose();
    out.input_errors[t].noalias() = (b_adj * ga).real();
    out.input_errors[t].noalias() += d.transpose() * e[t];
  }

  Eigen::VectorXd d1(m), d2(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    cd dl1, dl2;  // dλ/dp1, dλ/dp2
    if (coords == Coordinates::Cartesian) {
      dl1 = 1.0;
      dl2 = cd(0.0, 1.0);
    } else {
      const double nu = magnitude.value(p1(k));
      const double nup = magnitude.derivative(p1(k));
      const double theta = angle.value(p2(k), nu);
      const cd il = cd(0.0, 1.0) * l(k);
      dl1 = nup * (std::polar(1.0, theta) + il * angle.nu_coupling(p2(k), nu));
      dl2 = il * angle.derivative(p2(k), nu);
    }
    d1(k) = (q(k) * dl1).real();
    d2(k) = (q(k) * dl2).real();
    if (gamma_path) {
      const double r = std::abs(l(k));
      if (r > 0.0) {
        const double gp = norm.dgamma(r) * s(k).real();
        d1(k) += gp * (std::conj(l(k)) * dl1).real() / r;
        d2(k) += gp * (std::conj(l(k)) * dl2).real() / r;
      }
    }
  }
  const bool cart = coords == Coordinates::Cartesian;
  out.gradients.add(cart ? "lambda.re" : "omega_nu", flat_row(d1));
  out.gradients.add(cart ? "lambda.im" : "omega_theta", flat_row(d2));
  out.gradients.add("b.re", gB.real());
  out.gradients.add("b.im", gB.imag());
  out.gradients.add("c.re", std::move(dCre));
  out.gradients.add("c.im", std::move(dCim));
  out.gradients.add("d", std::move(dD));
  return out;
}

GradientBundle DiagonalComplexCell::parameters() const {
  const bool cart = coords == Coordinates::Cartesian;
  GradientBundle p;
  p.add(cart ? "lambda.re" : "omega_nu", flat_row(p1));
  p.add(cart ? "lambda.im" : "omega_theta", flat_row(p2));
  p.add("b.re", b.real());
  p.add("b.im", b.imag());
  p.add("c.re", c.real());
  p.add("c.im", c.imag());
  p.add("d", d);
  return p;
}

void DiagonalComplexCell::set_parameters(const Eigen::VectorXd& flat) {
  GradientBundle p = parameters();
  p.unflatten(flat);
  const auto& groups = p.groups();
  p1 = groups[0].values.col(0);
  p2 = groups[1].values.col(0);
  b.real() = p["b.re"];
  b.imag() = p["b.im"];
  c.real() = p["c.re"];
  c.imag() = p["c.im"];
  d = p["d"];
}

// ------------------------------------------------------------------ LSTM

void LSTMCell::validate() const {
  const auto n = U.cols();
  if (U.rows() != 4 * n || W.rows() != 4 * n || bias.size() != 4 * n)
    throw DimensionError("LSTMCell: inconsistent shapes");
}

Trajectory LSTMCell::forward(const TimeSeries& x) const {
  validate();
  const Eigen::Index batch = check_inputs(x, input_dim());
  const Eigen::Index n = state_dim();
  Trajectory tr;
  tr.states.resize(x.size() + 1);
  tr.cell_states.resize(x.size() + 1);
  tr.gates.resize(x.size());
  tr.outputs.resize(x.size());
  tr.states[0] = Eigen::MatrixXd::Zero(n, batch);
  tr.cell_states[0] = Eigen::MatrixXd::Zero(n, batch);
  Eigen::MatrixXd z;
  for (std::size_t t = 0; t < x.size(); ++t) {
    z.noalias() = W * x[t];
    z.noalias() += U * tr.states[t];
    z.colwise() += bias;
    Eigen::MatrixXd& gt = tr.gates[t];
    gt.resize(4 * n, batch);
    gt.topRows(2 * n) = sigmoid(z.topRows(2 * n));
    gt.middleRows(2 * n, n) = z.middleRows(2 * n, n).array().tanh().matrix();
    gt.bottomRows(n) = sigmoid(z.bottomRows(n));
    tr.cell_states[t + 1] = gt.middleRows(n, n).cwiseProduct(tr.cell_states[t]) +
                            gt.topRows(n).cwiseProduct(gt.middleRows(2 * n, n));
    tr.states[t + 1] =
        gt.bottomRows(n).cwiseProduct(tr.cell_states[t + 1].array().tanh().matrix());
    tr.outputs[t] = tr.states[t + 1];
  }
  return tr;
}

BackwardResult LSTMCell::backward(const TimeSeries& x, const Trajectory& tr,
                                  const TimeSeries& e) const {
  check_errors(e, tr, output_dim());
  const Eigen::Index n = state_dim();
  const Eigen::Index batch = x[0].cols();
  Eigen::MatrixXd dW = Eigen::MatrixXd::Zero(W.rows(), W.cols());
  Eigen::MatrixXd dU = Eigen::MatrixXd::Zero(U.rows(), U.cols());
  Eigen::VectorXd db = Eigen::VectorXd::Zero(bias.size());
  Eigen::MatrixXd dh_next = Eigen::MatrixXd::Zero(n, batch);
  Eigen::MatrixXd dc_next = Eigen::MatrixXd::Zero(n, batch);
  Eigen::MatrixXd dz(4 * n, batch);
  BackwardResult out;
  out.input_errors.resize(x.size());
  for (std::size_t t = x.size(); t-- > 0;) {
    const Eigen::MatrixXd& gt = tr.gates[t];
    const auto i = gt.topRows(n).array();
    const auto f = gt.middleRows(n, n).array();
    const auto g = gt.middleRows(2 * n, n).array();
    const auto o = gt.bottomRows(n).array();
    const Eigen::ArrayXXd tc = tr.cell_states[t + 1].array().tanh();
    const Eigen::ArrayXXd dh = (e[t] + dh_next).array();
    const Eigen::ArrayXXd dc = dh * o * (1.0 - tc * tc) + dc_next.array();
    dz.topRows(n) = (dc * g * i * (1.0 - i)).matrix();
    dz.middleRows(n, n) = (dc * tr.cell_states[t].array() * f * (1.0 - f)).matrix();
    dz.middleRows(2 * n, n) = (dc * i * (1.0 - g * g)).matrix();
    dz.bottomRows(n) = (dh * tc * o * (1.0 - o)).matrix();
    dW.noalias() += dz * x[t].transpose();
    dU.noalias() += dz * tr.states[t].transpose();
    db += dz.rowwise().sum();
    out.input_errors[t].noalias() = W.transpose() * dz;
    dh_next.noalias() = U.transpose() * dz;
    dc_next = (dc * f).matrix();
  }
  out.gradients.add("W", std::move(dW));
  out.gradients.add("U", std::move(dU));
  out.gradients.add("bias", flat_row(db));
  return out;
}

GradientBundle LSTMCell::parameters() const {
  GradientBundle p;
  p.add("W", W);
  p.add("U", U);
  p.add("bias", flat_row(bias));
  return p;
}

void LSTMCell::set_parameters(const Eigen::VectorXd& flat) {
  GradientBundle p = parameters();
  p.unflatten(flat);
  W = p["W"];
  U = p["U"];
  bias = p["bias"].col(0);
}

// ------------------------------------------------------------- dispatch

std::string cell_kind(const RecurrentCell& cell) {
  return std::visit(
      [](const auto& c) -> std::string {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, DenseLinearSSM>) return "dense";
        else if constexpr (std::is_same_v<T, BlockDiagonalCell>) return "block_diagonal";
        else if constexpr (std::is_same_v<T, DiagonalComplexCell>)
          return c.is_lru() ? "lru" : "complex_diagonal";
        else return "lstm";
      },
      cell);
}

Trajectory forward(const RecurrentCell& cell, const TimeSeries& inputs) {
  return std::visit([&](const auto& c) { return c.forward(inputs); }, cell);
}

Trajectory forward(const RecurrentCell& cell, const stochastic::SequenceBatch& inputs) {
  return forward(cell, to_time_major(inputs));
}

BackwardResult backward(const RecurrentCell& cell, const TimeSeries& inputs,
                        const Trajectory& traj, const TimeSeries& output_errors) {
  return std::visit([&](const auto& c) { return c.backward(inputs, traj, output_errors); }, cell);
}

GradientBundle parameters(const RecurrentCell& cell) {
  return std::visit([](const auto& c) { return c.parameters(); }, cell);
}

void set_parameters(RecurrentCell& cell, const Eigen::VectorXd& flat) {
  std::visit([&](auto& c) { c.set_parameters(flat); }, cell);
}

Eigen::Index input_dim(const RecurrentCell& cell) {
  return std::visit([](const auto& c) { return c.input_dim(); }, cell);
}

Eigen::Index output_dim(const RecurrentCell& cell) {
  return std::visit([](const auto& c) { return c.output_dim(); }, cell);
}

}  // namespace memcurse::models
