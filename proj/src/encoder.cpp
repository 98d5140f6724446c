#include "stacklab/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace stacklab {

void Autoencoder::init(Rng& rng) {
  for (Linear* l : encoder_layers()) init_linear(*l, rng);
  for (Linear* l : decoder_layers()) init_linear(*l, rng);
}

int Autoencoder::encode_node(Tape& tape, int x) {
  int h = tape.leaky_relu(e1.apply(tape, x));
  h = tape.leaky_relu(e2.apply(tape, h));
  h = tape.leaky_relu(e3.apply(tape, h));
  return e4.apply(tape, h);  // linear latent
}

int Autoencoder::decode_node(Tape& tape, int z) {
  int h = tape.leaky_relu(d1.apply(tape, z));
  h = tape.leaky_relu(d2.apply(tape, h));
  h = tape.leaky_relu(d3.apply(tape, h));
  return tape.sigmoid(d4.apply(tape, h));  // pixels live in [0, 1]
}

std::vector<Param*> Autoencoder::all_params() {
  std::vector<Param*> out;
  for (Linear* l : encoder_layers())
    for (Param* p : l->params()) out.push_back(p);
  for (Linear* l : decoder_layers())
    for (Param* p : l->params()) out.push_back(p);
  return out;
}

std::vector<Param*> Autoencoder::encoder_params() {
  std::vector<Param*> out;
  for (Linear* l : encoder_layers())
    for (Param* p : l->params()) out.push_back(p);
  return out;
}

namespace {

double epoch_pass(Autoencoder& model, const std::vector<NormalizedImage>& images,
                  const std::vector<int>& order, Adam* opt, double lr) {
  double total = 0;
  Tensor input(1, kImagePixels);
  for (int idx : order) {
    const NormalizedImage& img = images[static_cast<std::size_t>(idx)];
    std::copy(img.values.begin(), img.values.end(), input.v.begin());
    Tape tape;
    const int x = tape.leaf(&input);
    const int z = model.encode_node(tape, x);
    const int recon = model.decode_node(tape, z);
    Tensor target(1, kImagePixels);
    std::copy(img.values.begin(), img.values.end(), target.v.begin());
    const int loss = tape.mse(recon, target);
    total += tape.value(loss).v[0];
    if (opt) {
      tape.backward(loss);
      std::vector<Param*> params;
      for (Linear* l : model.encoder_layers()) {
        l->collect(tape);
        for (Param* p : l->params()) params.push_back(p);
      }
      for (Linear* l : model.decoder_layers()) {
        l->collect(tape);
        for (Param* p : l->params()) params.push_back(p);
      }
      opt->step(params, lr);
      for (Param* p : params) p->zero_grad();
    }
  }
  return total / static_cast<double>(order.size());
}

}  // namespace

EncoderTrainResult train_autoencoder(Autoencoder& model,
                                     const std::vector<NormalizedImage>& train,
                                     const std::vector<NormalizedImage>& val,
                                     const EncoderTrainConfig& config) {
  if (train.empty()) throw EmptyDataset();
  Rng rng(config.seed);
  model.init(rng);
  Adam opt;

  std::vector<int> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<int> val_order(val.size());
  std::iota(val_order.begin(), val_order.end(), 0);

  EncoderTrainResult res;
  double best_val = std::numeric_limits<double>::infinity();
  int since_improvement = 0;
  long steps = 0;
  for (long epoch = 0; epoch < config.max_epochs; ++epoch) {
    // seeded in-place shuffle
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng.index(static_cast<int>(i)))]);
    const long sched = config.lr_per_optimizer_step ? steps : epoch;
    const double lr = lr_schedule(config.lr, config.gamma, config.lr_step, sched);
    const double train_mse = epoch_pass(model, train, order, &opt, lr);
    steps += static_cast<long>(order.size());
    const double val_mse =
        val.empty() ? train_mse : epoch_pass(model, val, val_order, nullptr, 0);
    res.log.push_back({static_cast<double>(epoch), train_mse, val_mse});
    res.epochs = epoch + 1;
    res.final_train_mse = train_mse;
    res.final_val_mse = val_mse;
    if (!std::isfinite(train_mse)) break;  // NaN guard; caller reports failure
    if (val_mse < best_val - config.plateau_delta) {
      best_val = val_mse;
      since_improvement = 0;
    } else if (++since_improvement >= config.plateau_epochs) {
      break;
    }
  }
  return res;
}

EncoderCorpus encoder_corpus(std::uint64_t seed, int jitters_per_object) {
  EncoderCorpus corpus;
  const auto catalog = catalog_standard();
  Rng rng(Rng(seed).fork(0xEC).next_u64());
  for (const ObjectSpec& spec : catalog) {
    for (Orientation o : {Orientation::Upright, Orientation::Inverted}) {
      const double px = 1.2 * std::max(spec.outer_width, spec.outer_depth) / kImageSize;
      for (int j = 0; j < jitters_per_object; ++j) {
        const double dx = j == 0 ? 0.0 : rng.uniform(-0.5, 0.5) * px;
        const double dy = j == 0 ? 0.0 : rng.uniform(-0.5, 0.5) * px;
        NormalizedImage img = normalize(render_object(spec, o, dx, dy));
        if (j + 1 == jitters_per_object)
          corpus.val.push_back(std::move(img));
        else
          corpus.train.push_back(std::move(img));
      }
    }
  }
  return corpus;
}

namespace {

// tape-free affine map with the same per-element summation order as the
// matmul kernels, so results are bit-identical to the recorded path
std::vector<double> linear_plain(const Linear& l, const std::vector<double>& x) {
  const Tensor& w = l.w.value;
  std::vector<double> y(static_cast<std::size_t>(w.cols));
  for (int j = 0; j < w.cols; ++j) {
    double s = 0;
    for (int k = 0; k < w.rows; ++k) s += x[static_cast<std::size_t>(k)] * w.at(k, j);
    y[static_cast<std::size_t>(j)] = s + l.b.value.at(0, j);
  }
  return y;
}

void leaky_inplace(std::vector<double>& x) {
  for (double& v : x)
    if (v < 0) v *= Tape::kLeakySlope;
}

}  // namespace

LatentFeature encode(const Autoencoder& model, const NormalizedImage& img,
                     std::optional<int> orientation_flag) {
  std::vector<double> h = linear_plain(model.e1, img.values);
  leaky_inplace(h);
  h = linear_plain(model.e2, h);
  leaky_inplace(h);
  h = linear_plain(model.e3, h);
  leaky_inplace(h);
  h = linear_plain(model.e4, h);
  LatentFeature f;
  for (int i = 0; i < 4; ++i) f.z[static_cast<std::size_t>(i)] = h[static_cast<std::size_t>(i)];
  f.d_min = img.d_min;
  f.d_max = img.d_max;
  f.orientation_flag = orientation_flag;
  return f;
}

void save_encoder(const std::string& path, Autoencoder& model,
                  const std::string& sidecar_json) {
  // only the encoder half; the decoder is not used downstream
  std::vector<const Param*> params;
  for (Linear* l : model.encoder_layers())
    for (Param* p : l->params()) params.push_back(p);
  save_snapshot(path, params, sidecar_json);
}

void load_encoder(const std::string& path, Autoencoder& model) {
  std::vector<Param*> params = model.encoder_params();
  load_snapshot(path, params);
}

}  // namespace stacklab
