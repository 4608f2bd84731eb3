#pragma once

#include <bit>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "socsim/contracts.hpp"
#include "socsim/genmodel/genmodel.hpp"
#include "socsim/numerics/net.hpp"

namespace socsim {

static_assert(std::endian::native == std::endian::little,
              "parameter files are raw little-endian float64");

inline void write_doubles(const std::filesystem::path& path,
                          const Eigen::VectorXd& v) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "serialize: cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
  require(out.good(), "serialize: short write to " + path.string());
}

inline Eigen::VectorXd read_doubles(const std::filesystem::path& path,
                                    long count) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "serialize: cannot open " + path.string());
  Eigen::VectorXd v(count);
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  require(in.gcount() == static_cast<std::streamsize>(count * sizeof(double)),
          "serialize: short read from " + path.string());
  return v;
}

namespace detail {

inline nlohmann::json net_manifest(const std::string& name,
                                   const FeedForwardNet& net, long offset) {
  std::vector<int> dims{net.input_dim()};
  std::vector<std::string> acts;
  for (const auto& l : net.layers()) {
    dims.push_back(static_cast<int>(l.weight.rows()));
    acts.push_back(l.act == Activation::Tanh ? "tanh" : "linear");
  }
  return nlohmann::json{{"name", name},
                        {"dims", dims},
                        {"activations", acts},
                        {"offset_doubles", offset},
                        {"count_doubles", net.parameter_count()}};
}

inline FeedForwardNet net_from_manifest(const nlohmann::json& j) {
  const auto dims = j.at("dims").get<std::vector<int>>();
  const auto acts = j.at("activations").get<std::vector<std::string>>();
  require(dims.size() == acts.size() + 1, "manifest: dims/activations mismatch");
  FeedForwardNet net(dims, Activation::Tanh, Activation::Linear);
  for (std::size_t l = 0; l < acts.size(); ++l) {
    require(acts[l] == "tanh" || acts[l] == "linear",
            "manifest: unknown activation " + acts[l]);
    net.layers()[l].act =
        acts[l] == "tanh" ? Activation::Tanh : Activation::Linear;
  }
  return net;
}

}  // namespace detail

// Architecture and flat-file layout description. The parameter file holds,
// per network (encoder, decoder, discriminator), per layer: the weight
// matrix in row-major order, then the bias vector; raw float64.
inline nlohmann::json model_manifest(const GenerativeModel& m) {
  long offset = 0;
  nlohmann::json nets = nlohmann::json::array();
  nets.push_back(detail::net_manifest("encoder", m.encoder(), offset));
  offset += m.encoder().parameter_count();
  nets.push_back(detail::net_manifest("decoder", m.decoder(), offset));
  offset += m.decoder().parameter_count();
  nets.push_back(detail::net_manifest("discriminator", m.discriminator(), offset));
  return nlohmann::json{{"networks", nets}};
}

inline Eigen::VectorXd pack_model(const GenerativeModel& m) {
  Eigen::VectorXd v(m.parameter_count());
  v << m.encoder().pack(), m.decoder().pack(), m.discriminator().pack();
  return v;
}

inline void unpack_model(GenerativeModel& m, const Eigen::VectorXd& v) {
  require(static_cast<long>(v.size()) == m.parameter_count(),
          "unpack_model: size mismatch");
  long at = 0;
  m.encoder().unpack(v.segment(at, m.encoder().parameter_count()));
  at += m.encoder().parameter_count();
  m.decoder().unpack(v.segment(at, m.decoder().parameter_count()));
  at += m.decoder().parameter_count();
  m.discriminator().unpack(v.segment(at, m.discriminator().parameter_count()));
}

inline void save_model_params(const GenerativeModel& m,
                              const std::filesystem::path& path) {
  write_doubles(path, pack_model(m));
}

inline GenerativeModel model_from_manifest(const nlohmann::json& manifest) {
  const auto& nets = manifest.at("networks");
  require(nets.size() == 3, "manifest: expected three networks");
  return GenerativeModel(detail::net_from_manifest(nets.at(0)),
                         detail::net_from_manifest(nets.at(1)),
                         detail::net_from_manifest(nets.at(2)));
}

inline GenerativeModel load_model(const nlohmann::json& manifest,
                                  const std::filesystem::path& params_path) {
  GenerativeModel m = model_from_manifest(manifest);
  unpack_model(m, read_doubles(params_path, m.parameter_count()));
  return m;
}

}  // namespace socsim
