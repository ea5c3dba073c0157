#include "debaterl/network.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace debaterl {

namespace {

// Gram-Schmidt on the short side of a Gaussian draw, giving a
// semi-orthogonal matrix scaled by gain.
Matrix orthogonal_matrix(std::size_t rows, std::size_t cols, float gain,
                         Rng& rng) {
  const bool transpose = rows < cols;
  const std::size_t n = transpose ? cols : rows;
  const std::size_t k = transpose ? rows : cols;
  // n x k with orthonormal columns.
  std::vector<std::vector<double>> q(k, std::vector<double>(n));
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < n; ++i) q[j][i] = rng.normal();
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t p = 0; p < j; ++p) {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += q[j][i] * q[p][i];
        for (std::size_t i = 0; i < n; ++i) q[j][i] -= dot * q[p][i];
      }
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) norm += q[j][i] * q[j][i];
    norm = std::sqrt(norm);
    if (norm < 1e-12) norm = 1.0;
    for (std::size_t i = 0; i < n; ++i) q[j][i] /= norm;
  }
  Matrix out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = transpose ? q[r][c] : q[c][r];
      out.at(r, c) = gain * float(v);
    }
  return out;
}

}  // namespace

Network make_network(const std::vector<LayerSpec>& specs, Rng& rng,
                     const InitConfig& init) {
  if (specs.empty()) throw std::invalid_argument("make_network: no layers");
  for (std::size_t i = 1; i < specs.size(); ++i)
    if (specs[i].in_dim != specs[i - 1].out_dim)
      throw std::invalid_argument("make_network: layer dims do not chain");

  Network net;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& s = specs[i];
    Layer layer;
    layer.spec = s;
    const bool last = (i + 1 == specs.size());
    const float gain = last ? init.final_gain : init.gain;
    if (init.orthogonal) {
      layer.weight = orthogonal_matrix(s.in_dim, s.out_dim, gain, rng);
    } else {
      // Uniform He-style fan-in scaling.
      const float bound = std::sqrt(6.0f / float(s.in_dim));
      layer.weight = Matrix(s.in_dim, s.out_dim);
      for (auto& w : layer.weight.data)
        w = gain * float(rng.uniform() * 2.0 - 1.0) * bound;
    }
    layer.bias = Matrix(1, s.out_dim, 0.0f);
    if (s.activation == Activation::PRelu)
      layer.prelu_slope = Matrix(1, s.out_dim, 0.25f);
    if (s.batch_norm) {
      layer.bn_scale = Matrix(1, s.out_dim, 1.0f);
      layer.bn_shift = Matrix(1, s.out_dim, 0.0f);
      layer.running_mean = Matrix(1, s.out_dim, 0.0f);
      layer.running_var = Matrix(1, s.out_dim, 1.0f);
    }
    net.layers.push_back(std::move(layer));
  }
  return net;
}

AdamState make_adam(const Network& net, float lr, float weight_decay) {
  AdamState st;
  st.lr = lr;
  st.weight_decay = weight_decay;
  for (const Matrix* p : net.parameters()) {
    st.m.emplace_back(p->rows, p->cols);
    st.v.emplace_back(p->rows, p->cols);
  }
  return st;
}

void adam_step(std::vector<Matrix*> params, const std::vector<Matrix>& grads,
               AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw std::invalid_argument("adam_step: parameter count mismatch");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(double(state.beta1), double(state.step));
  const double bc2 = 1.0 - std::pow(double(state.beta2), double(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& p = *params[i];
    const Matrix& gm = grads[i];
    if (!p.same_shape(gm))
      throw std::invalid_argument("adam_step: gradient shape mismatch");
    for (std::size_t k = 0; k < p.size(); ++k) {
      const float g = gm.data[k];
      state.m[i].data[k] =
          state.beta1 * state.m[i].data[k] + (1.0f - state.beta1) * g;
      state.v[i].data[k] =
          state.beta2 * state.v[i].data[k] + (1.0f - state.beta2) * g * g;
      const double mhat = state.m[i].data[k] / bc1;
      const double vhat = state.v[i].data[k] / bc2;
      double upd = state.lr * mhat / (std::sqrt(vhat) + state.eps);
      if (state.weight_decay > 0.0f)
        upd += double(state.lr) * double(state.weight_decay) * double(p.data[k]);
      p.data[k] = float(p.data[k] - upd);
    }
  }
}

double clip_grad_norm(std::vector<Matrix>& grads, double max_norm) {
  if (max_norm <= 0.0)
    throw std::invalid_argument("clip_grad_norm: max_norm <= 0");
  double sq = 0.0;
  for (const auto& g : grads)
    for (float v : g.data) sq += double(v) * double(v);
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const float scale = float(max_norm / norm);
    for (auto& g : grads)
      for (float& v : g.data) v *= scale;
  }
  return norm;
}

namespace {

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::Identity: return "identity";
    case Activation::LeakyRelu: return "leaky_relu";
    case Activation::PRelu: return "prelu";
    case Activation::Softmax: return "softmax";
  }
  return "identity";
}

Activation activation_from(const std::string& s) {
  if (s == "identity") return Activation::Identity;
  if (s == "leaky_relu") return Activation::LeakyRelu;
  if (s == "prelu") return Activation::PRelu;
  if (s == "softmax") return Activation::Softmax;
  throw std::runtime_error("unknown activation: " + s);
}

void write_array(std::ofstream& f, const Matrix& m) {
  const std::uint64_t n = m.size();
  f.write(reinterpret_cast<const char*>(&n), sizeof(n));
  f.write(reinterpret_cast<const char*>(m.data.data()),
          std::streamsize(n * sizeof(float)));
}

void read_array(std::ifstream& f, Matrix& m) {
  std::uint64_t n = 0;
  f.read(reinterpret_cast<char*>(&n), sizeof(n));
  if (n != m.size())
    throw std::runtime_error("weight file: array length mismatch");
  f.read(reinterpret_cast<char*>(m.data.data()),
         std::streamsize(n * sizeof(float)));
}

}  // namespace

void save_network(const Network& net, const std::string& path,
                  const std::vector<std::string>& manifest_extra) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  f << "debaterl-net v1\n";
  f << "layers " << net.layers.size() << "\n";
  for (const auto& l : net.layers) {
    f << "layer " << l.spec.in_dim << " " << l.spec.out_dim << " "
      << activation_name(l.spec.activation) << " " << l.spec.leaky_slope << " "
      << (l.spec.batch_norm ? 1 : 0) << "\n";
  }
  for (const auto& e : manifest_extra) f << "meta " << e << "\n";
  f << "end\n";
  for (const auto& l : net.layers) {
    write_array(f, l.weight);
    write_array(f, l.bias);
    if (l.spec.activation == Activation::PRelu) write_array(f, l.prelu_slope);
    if (l.spec.batch_norm) {
      write_array(f, l.bn_scale);
      write_array(f, l.bn_shift);
      write_array(f, l.running_mean);
      write_array(f, l.running_var);
    }
  }
}

Network load_network(const std::string& path,
                     std::vector<std::string>* manifest_extra) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for read: " + path);
  std::string line;
  std::getline(f, line);
  if (line != "debaterl-net v1")
    throw std::runtime_error("bad weight file header");
  std::getline(f, line);
  std::istringstream hdr(line);
  std::string tok;
  std::size_t n_layers = 0;
  hdr >> tok >> n_layers;
  if (tok != "layers") throw std::runtime_error("bad weight file layer count");

  Network net;
  for (std::size_t i = 0; i < n_layers; ++i) {
    std::getline(f, line);
    std::istringstream ls(line);
    std::string kind, act;
    Layer l;
    int bn = 0;
    ls >> kind >> l.spec.in_dim >> l.spec.out_dim >> act >> l.spec.leaky_slope >>
        bn;
    if (kind != "layer") throw std::runtime_error("bad weight file layer line");
    l.spec.activation = activation_from(act);
    l.spec.batch_norm = bn != 0;
    l.weight = Matrix(l.spec.in_dim, l.spec.out_dim);
    l.bias = Matrix(1, l.spec.out_dim);
    if (l.spec.activation == Activation::PRelu)
      l.prelu_slope = Matrix(1, l.spec.out_dim);
    if (l.spec.batch_norm) {
      l.bn_scale = Matrix(1, l.spec.out_dim);
      l.bn_shift = Matrix(1, l.spec.out_dim);
      l.running_mean = Matrix(1, l.spec.out_dim);
      l.running_var = Matrix(1, l.spec.out_dim);
    }
    net.layers.push_back(std::move(l));
  }
  while (std::getline(f, line)) {
    if (line == "end") break;
    if (line.rfind("meta ", 0) == 0 && manifest_extra)
      manifest_extra->push_back(line.substr(5));
  }
  for (auto& l : net.layers) {
    read_array(f, l.weight);
    read_array(f, l.bias);
    if (l.spec.activation == Activation::PRelu) read_array(f, l.prelu_slope);
    if (l.spec.batch_norm) {
      read_array(f, l.bn_scale);
      read_array(f, l.bn_shift);
      read_array(f, l.running_mean);
      read_array(f, l.running_var);
    }
  }
  if (!f) throw std::runtime_error("weight file truncated");
  return net;
}

}  // namespace debaterl
