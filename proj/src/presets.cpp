#include "lcsvr/presets.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <vector>

#include "lcsvr/csv.hpp"
#include "lcsvr/dual.hpp"

namespace lcsvr {

LinearConstraints make_constraints(PresetKind kind, Eigen::Index p, IsotonicOrder order) {
  if (p < 1) throw std::invalid_argument("make_constraints: p must be >= 1");
  LinearConstraints lc = LinearConstraints::none(p);
  switch (kind) {
    case PresetKind::Svr:
      break;
    case PresetKind::Nnsvr:
      lc.A = -Eigen::MatrixXd::Identity(p, p);
      lc.b = Eigen::VectorXd::Zero(p);
      break;
    case PresetKind::Ssvr:
      lc.A = -Eigen::MatrixXd::Identity(p, p);
      lc.b = Eigen::VectorXd::Zero(p);
      lc.Gamma = Eigen::MatrixXd::Ones(1, p);
      lc.d = Eigen::VectorXd::Ones(1);
      break;
    case PresetKind::Isvr: {
      if (p < 2) throw std::invalid_argument("make_constraints: isotonic preset needs p >= 2");
      lc.A = Eigen::MatrixXd::Zero(p - 1, p);
      for (Eigen::Index i = 0; i < p - 1; ++i) {
        const double s = order == IsotonicOrder::Increasing ? 1.0 : -1.0;
        lc.A(i, i) = s;
        lc.A(i, i + 1) = -s;
      }
      lc.b = Eigen::VectorXd::Zero(p - 1);
      break;
    }
    case PresetKind::Custom:
      throw std::invalid_argument("make_constraints: custom constraints are caller-supplied");
  }
  return lc;
}

namespace {

FittedModel fit_impl(const TrainingSet& ts, const LinearConstraints& lc, PresetKind kind,
                     const Hyperparameters& hp) {
  ValidationResult vr = validate_problem(ts, lc, hp);
  if (!vr.ok()) throw ValidationError(std::move(vr));

  const DualProblem dp(ts, lc, hp);
  auto [state, report] = solve(dp);

  FittedModel m;
  m.kind = kind;
  m.hp = hp;
  m.report = std::move(report);
  m.primal.beta = recover_beta(dp, state.theta);
  const InterceptEpsilon ie = recover_intercept_epsilon(dp, state.theta, m.primal.beta);
  m.primal.beta0 = ie.beta0;
  m.primal.epsilon = ie.epsilon;
  m.primal.degenerate_intercept = ie.degenerate;
  m.primal.support_flags.resize(static_cast<std::size_t>(ts.n()));
  for (Eigen::Index i = 0; i < ts.n(); ++i) {
    m.primal.support_flags[static_cast<std::size_t>(i)] =
        state.theta[i] - state.theta[ts.n() + i] != 0.0;
  }
  return m;
}

}  // namespace

FittedModel fit(const TrainingSet& ts, PresetKind kind, const Hyperparameters& hp) {
  return fit_impl(ts, make_constraints(kind, ts.p()), kind, hp);
}

FittedModel fit_with_constraints(const TrainingSet& ts, const LinearConstraints& lc,
                                 const Hyperparameters& hp) {
  return fit_impl(ts, lc, PresetKind::Custom, hp);
}

Eigen::VectorXd predict(const FittedModel& m, const Eigen::Ref<const Eigen::MatrixXd>& Xnew) {
  if (Xnew.cols() != m.primal.beta.size()) {
    throw std::invalid_argument("predict: feature matrix has " + std::to_string(Xnew.cols()) +
                                " columns, model has " + std::to_string(m.primal.beta.size()));
  }
  return (Xnew * m.primal.beta).array() + m.primal.beta0;
}

Eigen::VectorXd project_simplex(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const Eigen::Index p = v.size();
  std::vector<double> u(v.data(), v.data() + p);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumsum = 0.0;
  double threshold = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) {
    cumsum += u[static_cast<std::size_t>(j)];
    const double t = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (u[static_cast<std::size_t>(j)] - t > 0.0) threshold = t;
  }
  return (v.array() - threshold).max(0.0);
}

FittedModel fit_projected(const TrainingSet& ts, const Hyperparameters& hp,
                          ProjectionTarget target) {
  const LinearConstraints lc = LinearConstraints::none(ts.p());
  ValidationResult vr = validate_problem(ts, lc, hp);
  if (!vr.ok()) throw ValidationError(std::move(vr));

  const DualProblem dp(ts, lc, hp);
  auto [state, report] = solve(dp);

  FittedModel m;
  m.kind = PresetKind::Svr;
  m.projected = true;
  m.target = target;
  m.hp = hp;
  m.report = std::move(report);

  const Eigen::VectorXd beta_svr = recover_beta(dp, state.theta);
  m.primal.beta = target == ProjectionTarget::PositiveOrthant ? beta_svr.cwiseMax(0.0).eval()
                                                              : project_simplex(beta_svr);

  // The projected beta no longer matches the dual intercept, so rerun the
  // free-support recovery against it using the SVR solution's free sets.
  const InterceptEpsilon ie = recover_intercept_epsilon(dp, state.theta, m.primal.beta);
  m.primal.beta0 = ie.beta0;
  m.primal.epsilon = ie.epsilon;
  m.primal.degenerate_intercept = ie.degenerate;
  m.primal.support_flags.resize(static_cast<std::size_t>(ts.n()));
  for (Eigen::Index i = 0; i < ts.n(); ++i) {
    m.primal.support_flags[static_cast<std::size_t>(i)] =
        state.theta[i] - state.theta[ts.n() + i] != 0.0;
  }
  return m;
}

std::string kind_name(const FittedModel& m) {
  if (m.projected) {
    return m.target == ProjectionTarget::PositiveOrthant ? "psvr" : "cibersort";
  }
  switch (m.kind) {
    case PresetKind::Svr: return "svr";
    case PresetKind::Nnsvr: return "nnsvr";
    case PresetKind::Ssvr: return "ssvr";
    case PresetKind::Isvr: return "isvr";
    case PresetKind::Custom: return "custom";
  }
  return "svr";
}

std::string model_to_string(const FittedModel& m) {
  std::ostringstream os;
  os << "[meta]\n";
  os << "kind " << kind_name(m) << '\n';
  os << "C " << format_double(m.hp.C) << '\n';
  os << "nu " << format_double(m.hp.nu) << '\n';
  os << "tau " << format_double(m.hp.tau) << '\n';
  os << "[beta]\n";
  for (Eigen::Index i = 0; i < m.primal.beta.size(); ++i) {
    os << format_double(m.primal.beta[i]) << '\n';
  }
  os << "[intercept]\n" << format_double(m.primal.beta0) << '\n';
  os << "[epsilon]\n" << format_double(m.primal.epsilon) << '\n';
  return os.str();
}

FittedModel model_from_string(const std::string& text) {
  FittedModel m;
  std::istringstream is(text);
  std::string line;
  std::string section;
  std::vector<double> beta;
  bool have_intercept = false, have_epsilon = false;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '[') {
      section = line;
      continue;
    }
    if (section == "[meta]") {
      const std::size_t sp = line.find(' ');
      if (sp == std::string::npos) throw CsvError("bad meta line '" + line + "' in model");
      const std::string key = line.substr(0, sp);
      const std::string value = line.substr(sp + 1);
      if (key == "kind") {
        if (value == "svr") m.kind = PresetKind::Svr;
        else if (value == "nnsvr") m.kind = PresetKind::Nnsvr;
        else if (value == "ssvr") m.kind = PresetKind::Ssvr;
        else if (value == "isvr") m.kind = PresetKind::Isvr;
        else if (value == "custom") m.kind = PresetKind::Custom;
        else if (value == "psvr") { m.kind = PresetKind::Svr; m.projected = true; m.target = ProjectionTarget::PositiveOrthant; }
        else if (value == "cibersort") { m.kind = PresetKind::Svr; m.projected = true; m.target = ProjectionTarget::Simplex; }
        else throw CsvError("unknown model kind '" + value + "'");
      } else if (key == "C") {
        m.hp.C = parse_double(value, "model meta C");
      } else if (key == "nu") {
        m.hp.nu = parse_double(value, "model meta nu");
      } else if (key == "tau") {
        m.hp.tau = parse_double(value, "model meta tau");
      } else {
        throw CsvError("unknown meta key '" + key + "' in model");
      }
    } else if (section == "[beta]") {
      beta.push_back(parse_double(line, "model beta"));
    } else if (section == "[intercept]") {
      m.primal.beta0 = parse_double(line, "model intercept");
      have_intercept = true;
    } else if (section == "[epsilon]") {
      m.primal.epsilon = parse_double(line, "model epsilon");
      have_epsilon = true;
    } else {
      throw CsvError("unexpected model line '" + line + "'");
    }
  }
  if (beta.empty() || !have_intercept || !have_epsilon) {
    throw CsvError("incomplete model file");
  }
  m.primal.beta = Eigen::Map<const Eigen::VectorXd>(beta.data(),
                                                    static_cast<Eigen::Index>(beta.size()));
  return m;
}

void save_model(const FittedModel& m, const std::string& path) {
  atomic_write_file(path, model_to_string(m));
}

FittedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_string(buf.str());
}

}  // namespace lcsvr
