#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "socsim/contracts.hpp"
#include "socsim/numerics/rng.hpp"

namespace socsim {

enum class Activation { Linear, Tanh };

struct Layer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
  Activation act = Activation::Linear;
};

// Intermediates kept by a forward pass. Owned by the caller so a const net
// can serve many concurrent evaluations.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> inputs;       // input to each layer
  std::vector<Eigen::MatrixXd> activations;  // output of each layer
  bool valid = false;
};

struct NetGrads {
  std::vector<Eigen::MatrixXd> dweight;
  std::vector<Eigen::VectorXd> dbias;

  NetGrads& operator+=(const NetGrads& o) {
    for (std::size_t l = 0; l < dweight.size(); ++l) {
      dweight[l] += o.dweight[l];
      dbias[l] += o.dbias[l];
    }
    return *this;
  }
  NetGrads& operator*=(double s) {
    for (std::size_t l = 0; l < dweight.size(); ++l) {
      dweight[l] *= s;
      dbias[l] *= s;
    }
    return *this;
  }
};

// Small dense MLP with hand-rolled reverse-mode gradients. Batches are
// matrices whose columns are samples.
class FeedForwardNet {
 public:
  FeedForwardNet() = default;

  // Zero-initialized net; dims = {in, h1, ..., out}.
  FeedForwardNet(const std::vector<int>& dims, Activation hidden,
                 Activation output) {
    require(dims.size() >= 2, "net: need at least input and output dims");
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
      require(dims[i] >= 1 && dims[i + 1] >= 1, "net: dims must be positive");
      Layer l;
      l.weight = Eigen::MatrixXd::Zero(dims[i + 1], dims[i]);
      l.bias = Eigen::VectorXd::Zero(dims[i + 1]);
      l.act = (i + 2 == dims.size()) ? output : hidden;
      layers_.push_back(std::move(l));
    }
  }

  // W ~ N(0, 1/fan_in), b = 0.
  static FeedForwardNet random(const std::vector<int>& dims, Activation hidden,
                               Activation output, RngStream& rng) {
    FeedForwardNet net(dims, hidden, output);
    for (auto& l : net.layers_) {
      const double scale = 1.0 / std::sqrt(static_cast<double>(l.weight.cols()));
      l.weight = scale * rng.normals(static_cast<int>(l.weight.rows()),
                                     static_cast<int>(l.weight.cols()));
    }
    return net;
  }

  int input_dim() const { return static_cast<int>(layers_.front().weight.cols()); }
  int output_dim() const { return static_cast<int>(layers_.back().weight.rows()); }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x,
                          ForwardCache* cache = nullptr) const {
    require(static_cast<int>(x.rows()) == input_dim(),
            "net forward: input dim mismatch");
    if (cache) {
      cache->inputs.assign(layers_.size(), {});
      cache->activations.assign(layers_.size(), {});
    }
    Eigen::MatrixXd a = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      if (cache) cache->inputs[l] = a;
      Eigen::MatrixXd z = (layers_[l].weight * a).colwise() + layers_[l].bias;
      a = (layers_[l].act == Activation::Tanh)
              ? Eigen::MatrixXd(z.array().tanh())
              : std::move(z);
      if (cache) cache->activations[l] = a;
    }
    if (cache) cache->valid = true;
    return a;
  }

  Eigen::VectorXd forward(const Eigen::VectorXd& x,
                          ForwardCache* cache = nullptr) const {
    return forward(Eigen::MatrixXd(x), cache).col(0);
  }

  // Gradients of sum_b upstream(:,b) . output(:,b) w.r.t. parameters; also
  // the gradient w.r.t. the input if requested.
  NetGrads backward(const ForwardCache& cache, const Eigen::MatrixXd& upstream,
                    Eigen::MatrixXd* input_grad = nullptr) const {
    require_usage(cache.valid && cache.inputs.size() == layers_.size(),
                  "net backward: forward with caching must run first");
    require(static_cast<int>(upstream.rows()) == output_dim(),
            "net backward: upstream dim mismatch");
    require(upstream.cols() == cache.activations.back().cols(),
            "net backward: upstream batch size mismatch");

    NetGrads g;
    g.dweight.resize(layers_.size());
    g.dbias.resize(layers_.size());

    Eigen::MatrixXd delta = upstream;
    for (int l = static_cast<int>(layers_.size()) - 1; l >= 0; --l) {
      if (layers_[l].act == Activation::Tanh) {
        delta = delta.array() * (1.0 - cache.activations[l].array().square());
      }
      g.dweight[l] = delta * cache.inputs[l].transpose();
      g.dbias[l] = delta.rowwise().sum();
      if (l > 0 || input_grad) {
        Eigen::MatrixXd prev = layers_[l].weight.transpose() * delta;
        if (l == 0) {
          *input_grad = std::move(prev);
        } else {
          delta = std::move(prev);
        }
      }
    }
    return g;
  }

  NetGrads zero_grads() const {
    NetGrads g;
    for (const auto& l : layers_) {
      g.dweight.push_back(Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()));
      g.dbias.push_back(Eigen::VectorXd::Zero(l.bias.size()));
    }
    return g;
  }

  int parameter_count() const {
    int n = 0;
    for (const auto& l : layers_)
      n += static_cast<int>(l.weight.size() + l.bias.size());
    return n;
  }

  // Flat layout used for optimizer state and snapshots: per layer, the weight
  // matrix in row-major order followed by the bias.
  Eigen::VectorXd pack() const {
    Eigen::VectorXd v(parameter_count());
    int k = 0;
    for (const auto& l : layers_) {
      for (int r = 0; r < l.weight.rows(); ++r)
        for (int c = 0; c < l.weight.cols(); ++c) v[k++] = l.weight(r, c);
      for (int i = 0; i < l.bias.size(); ++i) v[k++] = l.bias[i];
    }
    return v;
  }

  void unpack(const Eigen::VectorXd& v) {
    require(static_cast<int>(v.size()) == parameter_count(),
            "net unpack: size mismatch");
    int k = 0;
    for (auto& l : layers_) {
      for (int r = 0; r < l.weight.rows(); ++r)
        for (int c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = v[k++];
      for (int i = 0; i < l.bias.size(); ++i) l.bias[i] = v[k++];
    }
  }

  static Eigen::VectorXd pack_grads(const NetGrads& g) {
    int n = 0;
    for (std::size_t l = 0; l < g.dweight.size(); ++l)
      n += static_cast<int>(g.dweight[l].size() + g.dbias[l].size());
    Eigen::VectorXd v(n);
    int k = 0;
    for (std::size_t l = 0; l < g.dweight.size(); ++l) {
      for (int r = 0; r < g.dweight[l].rows(); ++r)
        for (int c = 0; c < g.dweight[l].cols(); ++c) v[k++] = g.dweight[l](r, c);
      for (int i = 0; i < g.dbias[l].size(); ++i) v[k++] = g.dbias[l][i];
    }
    return v;
  }

 private:
  std::vector<Layer> layers_;
};

}  // namespace socsim
