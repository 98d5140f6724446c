#include "stacklab/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>

#include <json.hpp>

namespace stacklab {

namespace {

using nlohmann::ordered_json;

double round6(double v) { return std::round(v * 1e6) / 1e6; }

ordered_json image_to_json(const NormalizedImage& img) {
  ordered_json j;
  j["d_min"] = round6(img.d_min);
  j["d_max"] = round6(img.d_max);
  ordered_json vals = ordered_json::array();
  for (double v : img.values) vals.push_back(round6(v));
  j["values"] = std::move(vals);
  return j;
}

NormalizedImage image_from_json(const ordered_json& j) {
  NormalizedImage img;
  img.d_min = j.at("d_min").get<double>();
  img.d_max = j.at("d_max").get<double>();
  img.values = j.at("values").get<std::vector<double>>();
  return img;
}

ordered_json pose_to_json(const Pose& p) {
  return ordered_json{{"x", round6(p.x)},
                      {"y", round6(p.y)},
                      {"z", round6(p.z)},
                      {"orientation", to_string(p.orientation)}};
}

Pose pose_from_json(const ordered_json& j) {
  Pose p;
  p.x = j.at("x").get<double>();
  p.y = j.at("y").get<double>();
  p.z = j.at("z").get<double>();
  p.orientation = orientation_from_string(j.at("orientation").get<std::string>());
  return p;
}

// Render cache shared inside one generation run; keyed by (id, orientation).
class RenderCache {
 public:
  const NormalizedImage& get(const ObjectSpec& spec, Orientation orientation) {
    const std::pair<int, int> key{spec.id, static_cast<int>(orientation)};
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(key, normalize(render_object(spec, orientation))).first->second;
  }

 private:
  std::map<std::pair<int, int>, NormalizedImage> cache_;
};

std::vector<InteractionRecord> run_episode_impl(Rng& rng,
                                                const std::vector<ObjectSpec>& inventory,
                                                Mode mode, RenderCache& cache) {
  std::vector<InteractionRecord> records;
  std::vector<ObjectSpec> remaining = inventory;
  CompoundState compound;
  int step = 0;
  while (!remaining.empty()) {
    const int pick = rng.index(static_cast<int>(remaining.size()));
    const ObjectSpec spec = remaining[static_cast<std::size_t>(pick)];
    remaining.erase(remaining.begin() + pick);
    const int slot = mode == Mode::Linear ? 1 : rng.index(3);
    const Orientation orientation =
        mode == Mode::Linear ? Orientation::Upright
                             : (rng.index(2) == 0 ? Orientation::Upright : Orientation::Inverted);

    InteractionRecord rec;
    rec.step = ++step;
    rec.mode = mode;
    for (const Placement& m : compound.placements) {
      MemberSnapshot ms;
      ms.object_id = m.spec.id;
      ms.pose = m.pose;
      ms.slot = m.slot;
      ms.image = cache.get(m.spec, m.pose.orientation);
      rec.members.push_back(std::move(ms));
    }
    auto [after, outcome] = place(compound, spec, slot, orientation);
    const Placement& placed = after.placements.back();
    rec.new_id = spec.id;
    rec.slot = slot;
    rec.orientation = orientation;
    rec.new_image = cache.get(spec, orientation);
    rec.new_settled_pose = placed.pose;
    rec.outcome = outcome.kind;
    EffectRow row = effect_row(compound, placed, after);
    for (const EffectEntry& e : row.entries) {
      rec.e1.push_back(e.e1);
      rec.e2.push_back(e.e2);
    }
    rec.e3 = row.e3;
    records.push_back(std::move(rec));
    if (row.e3 == 1) break;  // episode ends at the first fall or collapse
    compound = std::move(after);
  }
  return records;
}

}  // namespace

std::vector<ObjectSpec> episode_pool(Mode mode) {
  const auto catalog = catalog_standard();
  if (mode == Mode::Linear) return catalog;
  // cubes and cups; replicated so that equal-height bridge legs exist
  std::vector<ObjectSpec> pool;
  int id = 0;
  for (const ObjectSpec& s : catalog) {
    if (s.kind != ObjectKind::Cube && s.kind != ObjectKind::Cup) continue;
    const int copies = s.kind == ObjectKind::Cube ? 3 : 2;
    for (int copy = 0; copy < copies; ++copy) {
      ObjectSpec c = s;
      c.id = id++;
      pool.push_back(c);
    }
  }
  return pool;
}

std::vector<InteractionRecord> run_episode(std::uint64_t seed,
                                           const std::vector<ObjectSpec>& inventory,
                                           Mode mode) {
  Rng rng(seed);
  RenderCache cache;
  return run_episode_impl(rng, inventory, mode, cache);
}

std::vector<InteractionRecord> generate_dataset(std::uint64_t seed, int episodes,
                                                const std::vector<ObjectSpec>& pool,
                                                Mode mode, int max_inventory) {
  std::vector<std::vector<InteractionRecord>> buckets(static_cast<std::size_t>(episodes));
#pragma omp parallel
  {
    RenderCache cache;  // per-worker cache; contents are deterministic
#pragma omp for schedule(dynamic)
    for (int e = 0; e < episodes; ++e) {
      Rng rng(seed + static_cast<std::uint64_t>(e));
      const int max_n = std::min<int>(max_inventory, static_cast<int>(pool.size()));
      const int n = 2 + rng.index(std::max(1, max_n - 1));
      std::vector<ObjectSpec> available = pool;
      std::vector<ObjectSpec> inventory;
      for (int i = 0; i < n; ++i) {
        const int pick = rng.index(static_cast<int>(available.size()));
        inventory.push_back(available[static_cast<std::size_t>(pick)]);
        available.erase(available.begin() + pick);
      }
      buckets[static_cast<std::size_t>(e)] = run_episode_impl(rng, inventory, mode, cache);
    }
  }
  std::vector<InteractionRecord> all;
  for (int e = 0; e < episodes; ++e) {
    for (InteractionRecord& r : buckets[static_cast<std::size_t>(e)]) {
      r.episode = e;
      all.push_back(std::move(r));
    }
  }
  return all;
}

std::string record_to_json(const InteractionRecord& rec) {
  ordered_json j;
  j["episode"] = rec.episode;
  j["step"] = rec.step;
  j["mode"] = to_string(rec.mode);
  ordered_json members = ordered_json::array();
  for (const MemberSnapshot& m : rec.members) {
    ordered_json mj;
    mj["id"] = m.object_id;
    mj["pose"] = pose_to_json(m.pose);
    mj["slot"] = m.slot;
    mj["image"] = image_to_json(m.image);
    members.push_back(std::move(mj));
  }
  j["members"] = std::move(members);
  j["new_id"] = rec.new_id;
  j["slot"] = rec.slot;
  j["orientation"] = to_string(rec.orientation);
  j["new_image"] = image_to_json(rec.new_image);
  j["new_pose"] = pose_to_json(rec.new_settled_pose);
  j["outcome"] = to_string(rec.outcome);
  ordered_json e1 = ordered_json::array();
  for (const auto& v : rec.e1) e1.push_back({round6(v[0]), round6(v[1])});
  j["e1"] = std::move(e1);
  ordered_json e2 = ordered_json::array();
  for (const auto& v : rec.e2) e2.push_back({round6(v[0]), round6(v[1]), round6(v[2]), round6(v[3])});
  j["e2"] = std::move(e2);
  j["e3"] = rec.e3;
  return j.dump();
}

InteractionRecord record_from_json(const std::string& line) {
  const ordered_json j = ordered_json::parse(line);
  InteractionRecord rec;
  rec.episode = j.at("episode").get<int>();
  rec.step = j.at("step").get<int>();
  rec.mode = mode_from_string(j.at("mode").get<std::string>());
  for (const auto& mj : j.at("members")) {
    MemberSnapshot m;
    m.object_id = mj.at("id").get<int>();
    m.pose = pose_from_json(mj.at("pose"));
    m.slot = mj.at("slot").get<int>();
    m.image = image_from_json(mj.at("image"));
    rec.members.push_back(std::move(m));
  }
  rec.new_id = j.at("new_id").get<int>();
  rec.slot = j.at("slot").get<int>();
  rec.orientation = orientation_from_string(j.at("orientation").get<std::string>());
  rec.new_image = image_from_json(j.at("new_image"));
  rec.new_settled_pose = pose_from_json(j.at("new_pose"));
  for (const auto& v : j.at("e1")) rec.e1.push_back({v[0].get<double>(), v[1].get<double>()});
  for (const auto& v : j.at("e2"))
    rec.e2.push_back({v[0].get<double>(), v[1].get<double>(), v[2].get<double>(), v[3].get<double>()});
  rec.e3 = j.at("e3").get<int>();
  const std::string outcome = j.at("outcome").get<std::string>();
  for (SettleKind k : {SettleKind::StackedOnTop, SettleKind::InsertedInCavity,
                       SettleKind::PassedOverPole, SettleKind::RestsOnRim,
                       SettleKind::ToppledOff, SettleKind::CompoundCollapsed})
    if (outcome == to_string(k)) rec.outcome = k;
  return rec;
}

void write_jsonl(const std::string& path, const std::vector<InteractionRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const InteractionRecord& r : records) out << record_to_json(r) << "\n";
}

std::vector<InteractionRecord> read_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<InteractionRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    records.push_back(record_from_json(line));
  }
  return records;
}

}  // namespace stacklab
