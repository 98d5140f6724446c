#include "stacklab/nn.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>

namespace stacklab {

void init_linear(Linear& layer, Rng& rng) {
  const double bound = std::sqrt(1.0 / layer.w.value.rows);
  for (double& x : layer.w.value.v) x = rng.uniform(-bound, bound);
  for (double& x : layer.b.value.v) x = rng.uniform(-bound, bound);
}

double lr_schedule(double lr0, double gamma, int step_size, long scheduler_steps) {
  const long k = scheduler_steps / step_size;
  return lr0 * std::pow(gamma, static_cast<double>(k));
}

void Adam::step(const std::vector<Param*>& params, double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (Param* p : params) {
    for (std::size_t i = 0; i < p->value.v.size(); ++i) {
      const double g = p->grad.v[i];
      p->adam_m.v[i] = beta1_ * p->adam_m.v[i] + (1 - beta1_) * g;
      p->adam_v.v[i] = beta2_ * p->adam_v.v[i] + (1 - beta2_) * g * g;
      const double mhat = p->adam_m.v[i] / bc1;
      const double vhat = p->adam_v.v[i] / bc2;
      p->value.v[i] -= lr * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

Tensor adjacency_normalize(int n, const std::vector<std::pair<int, int>>& edges) {
  Tensor a(n, n);
  for (int i = 0; i < n; ++i) a.at(i, i) = 1.0;  // self-connections
  for (const auto& [from, to] : edges) {
    a.at(from, to) = 1.0;
    a.at(to, from) = 1.0;  // symmetrized before normalization
  }
  std::vector<double> inv_sqrt_deg(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double deg = 0;
    for (int j = 0; j < n; ++j) deg += a.at(i, j);
    inv_sqrt_deg[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(deg);
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      a.at(i, j) *= inv_sqrt_deg[static_cast<std::size_t>(i)] *
                    inv_sqrt_deg[static_cast<std::size_t>(j)];
  return a;
}

namespace {
constexpr char kMagic[8] = {'S', 'T', 'K', 'S', 'N', 'A', 'P', '1'};

void write_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
std::uint32_t read_u32(std::ifstream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}
}  // namespace

void save_snapshot(const std::string& path, const std::vector<const Param*>& params,
                   const std::string& sidecar_json) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(kMagic, sizeof(kMagic));
  write_u32(out, 1);
  write_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const Param* p : params) {
    write_u32(out, static_cast<std::uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    write_u32(out, static_cast<std::uint32_t>(p->value.rows));
    write_u32(out, static_cast<std::uint32_t>(p->value.cols));
  }
  for (const Param* p : params)
    out.write(reinterpret_cast<const char*>(p->value.v.data()),
              static_cast<std::streamsize>(p->value.v.size() * sizeof(double)));
  std::ofstream side(path + ".json", std::ios::binary);
  side << sidecar_json;
}

void load_snapshot(const std::string& path, const std::vector<Param*>& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelNotLoaded();
  char magic[8];
  in.read(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("bad snapshot magic in " + path);
  if (read_u32(in) != 1) throw std::runtime_error("unknown snapshot version");
  const std::uint32_t count = read_u32(in);
  if (count != params.size()) throw std::runtime_error("snapshot manifest size mismatch");
  for (Param* p : params) {
    const std::uint32_t name_len = read_u32(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const std::uint32_t rows = read_u32(in);
    const std::uint32_t cols = read_u32(in);
    if (name != p->name || rows != static_cast<std::uint32_t>(p->value.rows) ||
        cols != static_cast<std::uint32_t>(p->value.cols))
      throw std::runtime_error("snapshot manifest mismatch at " + p->name);
  }
  for (Param* p : params)
    in.read(reinterpret_cast<char*>(p->value.v.data()),
            static_cast<std::streamsize>(p->value.v.size() * sizeof(double)));
  if (!in) throw std::runtime_error("snapshot truncated: " + path);
}

std::string snapshot_sidecar(const std::string& path) {
  std::ifstream in(path + ".json", std::ios::binary);
  if (!in) return {};
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::size_t param_scalar_count(const std::vector<const Param*>& params) {
  std::size_t n = 0;
  for (const Param* p : params) n += p->value.size();
  return n;
}

}  // namespace stacklab
