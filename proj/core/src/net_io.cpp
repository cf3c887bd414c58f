#include "mdensity/net_io.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "mdensity/errors.hpp"

namespace mdensity {

namespace {

void expect(std::istream& in, const std::string& keyword) {
  std::string token;
  if (!(in >> token) || token != keyword)
    throw NetFormatError("net file: expected '" + keyword + "', found '" + token + "'");
}

template <typename T>
T read_value(std::istream& in, const char* what) {
  T value{};
  if (!(in >> value)) throw NetFormatError(std::string("net file: could not read ") + what);
  return value;
}

void write_params(std::ostream& out, const char* tag, const MlpParameters& p) {
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    const Mat& w = p.weights[l];
    out << tag << "-weight " << l << ' ' << w.rows() << ' ' << w.cols() << '\n';
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) out << (j ? " " : "") << w(i, j);
      out << '\n';
    }
    const Vec& b = p.biases[l];
    out << tag << "-bias " << l << ' ' << b.size() << '\n';
    for (Eigen::Index i = 0; i < b.size(); ++i) out << (i ? " " : "") << b[i];
    out << '\n';
  }
}

void read_params(std::istream& in, const std::string& tag, MlpParameters& p) {
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    Mat& w = p.weights[l];
    expect(in, tag + "-weight");
    if (read_value<std::size_t>(in, "layer index") != l || read_value<Eigen::Index>(in, "rows") != w.rows() ||
        read_value<Eigen::Index>(in, "cols") != w.cols())
      throw NetFormatError("net file: weight block header does not match the declared widths");
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = read_value<double>(in, "weight");
    Vec& b = p.biases[l];
    expect(in, tag + "-bias");
    if (read_value<std::size_t>(in, "layer index") != l || read_value<Eigen::Index>(in, "size") != b.size())
      throw NetFormatError("net file: bias block header does not match the declared widths");
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = read_value<double>(in, "bias");
  }
}

}  // namespace

void write_net(std::ostream& out, const MlpScoreNet& net, const AdamState* adam) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  const NoiseModel& noise = net.noise();
  out << "mdensity-net " << kNetFormatVersion << '\n';
  out << "M " << noise.M() << " d " << noise.d() << '\n';
  out << "sigmas";
  for (double s : noise.sigmas()) out << ' ' << s;
  out << '\n';
  out << "activation " << (net.activation() == HiddenActivation::silu ? "silu" : "identity") << '\n';
  out << "widths " << net.widths().size();
  for (int w : net.widths()) out << ' ' << w;
  out << '\n';
  out << "trained_steps " << net.trained_steps() << '\n';
  write_params(out, "param", net.params());
  if (adam) {
    out << "adam 1\n";
    out << "step " << adam->step << " lr " << adam->config.lr << " beta1 " << adam->config.beta1 << " beta2 "
        << adam->config.beta2 << " eps " << adam->config.eps << '\n';
    write_params(out, "adam-m", adam->m);
    write_params(out, "adam-v", adam->v);
  } else {
    out << "adam 0\n";
  }
  out << "end\n";
  out.precision(old_precision);
}

SavedNet read_net(std::istream& in) {
  expect(in, "mdensity-net");
  const int version = read_value<int>(in, "version");
  if (version != kNetFormatVersion) throw NetFormatError("net file: unsupported version " + std::to_string(version));
  expect(in, "M");
  const int M = read_value<int>(in, "M");
  expect(in, "d");
  const int d = read_value<int>(in, "d");
  if (M < 1 || d < 1) throw NetFormatError("net file: invalid M or d");
  expect(in, "sigmas");
  std::vector<double> sigmas(static_cast<std::size_t>(M));
  for (double& s : sigmas) s = read_value<double>(in, "sigma");
  expect(in, "activation");
  const std::string act = read_value<std::string>(in, "activation");
  HiddenActivation activation;
  if (act == "silu")
    activation = HiddenActivation::silu;
  else if (act == "identity")
    activation = HiddenActivation::identity;
  else
    throw NetFormatError("net file: unknown activation '" + act + "'");
  expect(in, "widths");
  const auto n_widths = read_value<std::size_t>(in, "width count");
  if (n_widths < 3 || n_widths > 64) throw NetFormatError("net file: implausible layer count");
  std::vector<int> widths(n_widths);
  for (int& w : widths) w = read_value<int>(in, "width");
  expect(in, "trained_steps");
  const long trained = read_value<long>(in, "trained_steps");

  SavedNet saved{MlpScoreNet(widths, NoiseModel(sigmas, d), activation), std::nullopt};
  saved.net.set_trained_steps(trained);
  read_params(in, "param", saved.net.params());
  expect(in, "adam");
  if (read_value<int>(in, "adam flag") == 1) {
    AdamState adam(saved.net.params());
    expect(in, "step");
    adam.step = read_value<long>(in, "adam step");
    expect(in, "lr");
    adam.config.lr = read_value<double>(in, "lr");
    expect(in, "beta1");
    adam.config.beta1 = read_value<double>(in, "beta1");
    expect(in, "beta2");
    adam.config.beta2 = read_value<double>(in, "beta2");
    expect(in, "eps");
    adam.config.eps = read_value<double>(in, "eps");
    read_params(in, "adam-m", adam.m);
    read_params(in, "adam-v", adam.v);
    saved.adam = std::move(adam);
  }
  expect(in, "end");
  if (!saved.net.params().all_finite()) throw NetFormatError("net file: non-finite parameters");
  return saved;
}

void save_net(const std::filesystem::path& path, const MlpScoreNet& net, const AdamState* adam) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_net(out, net, adam);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

SavedNet load_net(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_net(in);
}

}  // namespace mdensity
