#pragma once

#include <string>
#include <vector>

#include "stacklab/dataset.hpp"
#include "stacklab/encoder.hpp"
#include "stacklab/nn.hpp"

namespace stacklab {

struct BadQueryIndex : std::runtime_error {
  BadQueryIndex() : std::runtime_error("query index outside 1..k") {}
};

struct EmptyCompound : std::runtime_error {
  EmptyCompound() : std::runtime_error("an empty compound has no graph") {}
};

// Node feature matrix plus directed edges; adjacency carries self-loops and
// the symmetric normalization.
struct CompoundGraph {
  Tensor node_features;                     // k x f, placement order
  std::vector<std::pair<int, int>> edges;   // directed (later -> earlier)
  Tensor adjacency;                         // normalized (A + I)
};

// Consecutive placements are linked when their bounding boxes intersect
// (1 mm inflation) or the settle contact graph links them.
std::vector<std::pair<int, int>> edge_creation(const CompoundState& compound);

// Linear mode: chain edges between consecutive placements. Nonlinear mode:
// edge_creation. Throws EmptyCompound for k = 0.
CompoundGraph build_graph(const CompoundState& compound,
                          const std::vector<LatentFeature>& features, Mode mode);

struct GraphModelConfig {
  Mode mode = Mode::Linear;
  int feat_dim = 6;
  int gcn1 = 32;
  int gcn2 = 32;
  int dec1 = 96;
  int dec2 = 48;
  bool slot_conditioning = false;

  static GraphModelConfig for_mode(Mode mode);
  int decoder_in() const { return feat_dim + 3 * gcn2 + (slot_conditioning ? 3 : 0); }
};

// One head: two graph-convolution layers, mean+max aggregation, and a
// query-conditioned three-layer decoder.
struct EffectHead {
  Linear g1, g2;      // graph conv weights (adjacency-mixed affine maps)
  Linear l1, l2, l3;  // decoder
  int out_dim = 1;
  bool sigmoid_out = false;

  EffectHead() = default;
  EffectHead(const std::string& name, const GraphModelConfig& cfg, int out,
             bool sigmoid);
  std::vector<Param*> params();
  void collect(const Tape& tape);
};

struct GraphModel {
  GraphModelConfig config;
  EffectHead head_e1, head_e2, head_e3;

  explicit GraphModel(const GraphModelConfig& cfg);
  void init(Rng& rng);
  std::vector<Param*> all_params();
  std::size_t scalar_count();
};

struct ModelPrediction {
  std::array<double, 2> e1{};
  std::array<double, 4> e2{};
  double e3 = 0;
};

// Recorded forward of one head. `graph` may be null (empty compound);
// query_index is 1-based, 0 selects the empty path. Returns the output node.
int head_forward(Tape& tape, EffectHead& head, const GraphModelConfig& cfg,
                 const CompoundGraph* graph, const Tensor& new_feat, int query_index,
                 int slot);

// All three heads on one query.
ModelPrediction model_forward(GraphModel& model, const CompoundGraph* graph,
                              const LatentFeature& new_feat, int query_index, int slot);

struct CandidatePrediction {
  std::vector<EffectEntry> per_member;
  double collapse_prob = 0;
};

// Queries every compound member and evaluates the collapse head once against
// the top-most member.
CandidatePrediction predict_candidate(GraphModel& model, const CompoundState& compound,
                                      const std::vector<LatentFeature>& features,
                                      const LatentFeature& candidate_feat, int slot);

// --- training ---------------------------------------------------------------

struct QuerySample {
  Tensor feats;      // k x f (0 rows for an empty compound)
  Tensor adjacency;  // k x k
  Tensor new_feat;   // 1 x f
  int query_index = 0;  // 1-based; 0 = empty path
  int slot = 1;
  Tensor target;     // 1x2 (e1), 1x4 (e2) or 1x1 (e3)
  int episode = 0;
  int tower_size = 0;
};

struct SampleSet {
  std::vector<QuerySample> e1_train, e1_val;
  std::vector<QuerySample> e2_train, e2_val;
  std::vector<QuerySample> e3_train, e3_val;
  int max_tower = 0;
};

// Builds per-query training rows from interaction records. Episodes with
// id % val_modulus == 0 form the validation split (held out by episode, never
// by record).
SampleSet build_samples(const std::vector<InteractionRecord>& records,
                        const Autoencoder& encoder, Mode mode, int val_modulus);

struct TrainConfig {
  std::uint64_t seed = 42;
  int epochs = 200;
  double lr = 1e-4;
  double gamma = 0.95;
  int lr_step = 500;
  bool lr_per_optimizer_step = false;
  double lambda_sign = 1.0;
};

struct MetricRow {
  int epoch = 0;
  std::string head;
  std::string split;
  double loss = 0;
};

struct SizeError {
  int tower_size = 0;
  double e1_mae = 0;
  double e2_mae = 0;
  double e3_err = 0;
  int n_pairs = 0;  // e1/e2 rows
  int n_records = 0;
};

struct TrainLog {
  std::vector<MetricRow> rows;
  std::vector<SizeError> table;  // validation errors grouped by tower size
  bool nan_failure = false;
};

TrainLog train_graph_model(GraphModel& model, const SampleSet& samples,
                           const TrainConfig& config);

// Validation errors by tower size (rows with tower_size >= 1).
std::vector<SizeError> eval_graph_model(GraphModel& model, const SampleSet& samples);

void save_graph_model(const std::string& path, GraphModel& model,
                      const std::string& sidecar_json);
void load_graph_model(const std::string& path, GraphModel& model);

}  // namespace stacklab
