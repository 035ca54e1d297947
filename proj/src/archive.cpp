#include "eqalign/archive.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace eqalign {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json to_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vec vec_from_json(const json& a) {
  Vec v(a.size());
  for (size_t i = 0; i < a.size(); ++i) v[static_cast<int>(i)] = a[i].get<double>();
  return v;
}

json to_json(const std::vector<Vec>& vs) {
  json a = json::array();
  for (const auto& v : vs) a.push_back(to_json(v));
  return a;
}

std::vector<Vec> vecs_from_json(const json& a) {
  std::vector<Vec> out;
  out.reserve(a.size());
  for (const auto& e : a) out.push_back(vec_from_json(e));
  return out;
}

void write_lines(const fs::path& path, const std::vector<json>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& r : records) out << r.dump() << "\n";
}

std::vector<json> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<json> records;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) records.push_back(json::parse(line));
  }
  return records;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_run(const fs::path& dir, const RunResult& run) {
  fs::create_directories(dir);

  std::vector<json> steps;
  for (const auto& s : run.steps) {
    json r{{"t", s.t}, {"x", to_json(s.x)}};
    if (s.u.size() > 0) r["u"] = to_json(s.u);
    steps.push_back(std::move(r));
  }
  write_lines(dir / "steps.jsonl", steps);

  std::vector<json> belief;
  for (const auto& b : run.belief) {
    json r{{"t", b.t}, {"map", b.map_id}};
    json merges = json::array();
    for (const auto& [a, rep] : b.merges) merges.push_back(json::array({a, rep}));
    r["merges"] = std::move(merges);
    json parts = json::array();
    for (const auto& p : b.particles) {
      parts.push_back(json{{"id", p.id},
                           {"logw", p.log_weight},
                           {"w", p.weight},
                           {"pred", to_json(p.short_prediction)}});
    }
    r["particles"] = std::move(parts);
    if (b.truth_representative >= 0) {
      r["truth_rep"] = b.truth_representative;
      r["truth_w"] = b.truth_weight;
    }
    belief.push_back(std::move(r));
  }
  write_lines(dir / "belief.jsonl", belief);

  std::vector<json> preds;
  for (const auto& p : run.predictions) {
    preds.push_back(json{{"origin", p.origin_step}, {"pos", to_json(p.positions)}});
  }
  write_lines(dir / "predictions.jsonl", preds);

  json costs{{"player_costs", run.player_costs},
             {"truth_particle", run.truth_particle_id},
             {"truth_seed_params", run.truth_seed_params}};
  write_text(dir / "costs.json", costs.dump(2) + "\n");
}

RunResult read_run(const fs::path& dir) {
  RunResult run;
  for (const auto& r : read_lines(dir / "steps.jsonl")) {
    StepRecord s;
    s.t = r.at("t").get<int>();
    s.x = vec_from_json(r.at("x"));
    if (r.contains("u")) s.u = vec_from_json(r.at("u"));
    run.steps.push_back(std::move(s));
  }
  for (const auto& r : read_lines(dir / "belief.jsonl")) {
    BeliefRecord b;
    b.t = r.at("t").get<int>();
    b.map_id = r.at("map").get<int>();
    for (const auto& m : r.at("merges")) {
      b.merges.emplace_back(m[0].get<int>(), m[1].get<int>());
    }
    for (const auto& p : r.at("particles")) {
      ParticleSnapshot snap;
      snap.id = p.at("id").get<int>();
      snap.log_weight = p.at("logw").get<double>();
      snap.weight = p.at("w").get<double>();
      snap.short_prediction = vecs_from_json(p.at("pred"));
      b.particles.push_back(std::move(snap));
    }
    if (r.contains("truth_rep")) {
      b.truth_representative = r.at("truth_rep").get<int>();
      b.truth_weight = r.at("truth_w").get<double>();
    }
    run.belief.push_back(std::move(b));
  }
  for (const auto& r : read_lines(dir / "predictions.jsonl")) {
    PredictionRecord p;
    p.origin_step = r.at("origin").get<int>();
    p.positions = vecs_from_json(r.at("pos"));
    run.predictions.push_back(std::move(p));
  }
  const json costs = json::parse(read_text(dir / "costs.json"));
  run.player_costs = costs.at("player_costs").get<std::vector<double>>();
  run.truth_particle_id = costs.at("truth_particle").get<int>();
  run.truth_seed_params =
      costs.at("truth_seed_params").get<std::vector<double>>();
  return run;
}

json trajectory_to_json(const Trajectory& t) {
  return json{{"states", to_json(t.states)}, {"controls", to_json(t.controls)}};
}

Trajectory trajectory_from_json(const json& j) {
  Trajectory t;
  t.states = vecs_from_json(j.at("states"));
  t.controls = vecs_from_json(j.at("controls"));
  return t;
}

}  // namespace

void write_archive(const std::string& dir, const Archive& archive) {
  fs::create_directories(dir);
  const fs::path root(dir);

  json meta{{"version", archive.meta.version},
            {"command", archive.meta.command},
            {"mode", archive.meta.mode},
            {"count", archive.meta.count},
            {"ground_truth_particle", archive.meta.ground_truth_particle}};
  write_text(root / "meta.json", meta.dump(2) + "\n");
  write_text(root / "config.cfg", archive.config_text);

  if (archive.meta.command == "cluster") {
    std::vector<json> samples;
    for (const auto& s : archive.cluster.samples) {
      samples.push_back(json{{"i", s.index},
                             {"converged", s.converged},
                             {"iterations", s.iterations},
                             {"seed_params", s.seed_params},
                             {"costs", s.costs},
                             {"trajectory", trajectory_to_json(s.trajectory)}});
    }
    write_lines(root / "samples.jsonl", samples);

    json report{{"chosen_k", archive.cluster.chosen_k},
                {"clustered_indices", archive.cluster.clustered_indices},
                {"assignment", archive.cluster.clustering.assignment},
                {"inertia", archive.cluster.clustering.inertia},
                {"members", archive.cluster.report.members},
                {"mean_player_costs", archive.cluster.report.mean_player_costs},
                {"representative", archive.cluster.report.representative},
                {"handedness", archive.cluster.report.handedness}};
    write_text(root / "clusters.json", report.dump(2) + "\n");
    return;
  }

  for (size_t i = 0; i < archive.runs.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "run_%04zu", i);
    write_run(root / "runs" / name, archive.runs[i]);
  }
}

Archive read_archive(const std::string& dir) {
  const fs::path root(dir);
  Archive archive;

  const json meta = json::parse(read_text(root / "meta.json"));
  archive.meta.version = meta.at("version").get<std::string>();
  archive.meta.command = meta.at("command").get<std::string>();
  archive.meta.mode = meta.at("mode").get<std::string>();
  archive.meta.count = meta.at("count").get<int>();
  archive.meta.ground_truth_particle =
      meta.at("ground_truth_particle").get<int>();
  archive.config_text = read_text(root / "config.cfg");

  if (archive.meta.command == "cluster") {
    for (const auto& r : read_lines(root / "samples.jsonl")) {
      ClusterSample s;
      s.index = r.at("i").get<int>();
      s.converged = r.at("converged").get<bool>();
      s.iterations = r.at("iterations").get<int>();
      s.seed_params = r.at("seed_params").get<std::vector<double>>();
      s.costs = r.at("costs").get<std::vector<double>>();
      s.trajectory = trajectory_from_json(r.at("trajectory"));
      archive.cluster.samples.push_back(std::move(s));
    }
    const json report = json::parse(read_text(root / "clusters.json"));
    archive.cluster.chosen_k = report.at("chosen_k").get<int>();
    archive.cluster.clustered_indices =
        report.at("clustered_indices").get<std::vector<int>>();
    archive.cluster.clustering.assignment =
        report.at("assignment").get<std::vector<int>>();
    archive.cluster.clustering.inertia = report.at("inertia").get<double>();
    archive.cluster.clustering.k = archive.cluster.chosen_k;
    archive.cluster.report.k = archive.cluster.chosen_k;
    archive.cluster.report.members =
        report.at("members").get<std::vector<std::vector<int>>>();
    archive.cluster.report.mean_player_costs =
        report.at("mean_player_costs").get<std::vector<std::vector<double>>>();
    archive.cluster.report.representative =
        report.at("representative").get<std::vector<int>>();
    archive.cluster.report.handedness =
        report.at("handedness").get<std::vector<double>>();
    return archive;
  }

  std::vector<fs::path> run_dirs;
  if (fs::exists(root / "runs")) {
    for (const auto& entry : fs::directory_iterator(root / "runs")) {
      if (entry.is_directory()) run_dirs.push_back(entry.path());
    }
  }
  std::sort(run_dirs.begin(), run_dirs.end());
  for (const auto& d : run_dirs) archive.runs.push_back(read_run(d));
  return archive;
}

namespace {

struct Comparator {
  ReplayReport report;

  void fail(const std::string& where, double a, double b) {
    if (!report.passed) return;
    report.passed = false;
    std::ostringstream ss;
    ss.precision(17);
    ss << where << ": archived " << a << " vs fresh " << b;
    report.first_divergence = ss.str();
  }
  void fail(const std::string& where, const std::string& detail) {
    if (!report.passed) return;
    report.passed = false;
    report.first_divergence = where + ": " + detail;
  }

  void check(const std::string& where, double a, double b) {
    if (!report.passed) return;
    if (!(a == b)) fail(where, a, b);
  }
  void check(const std::string& where, int a, int b) {
    if (!report.passed) return;
    if (a != b) fail(where, static_cast<double>(a), static_cast<double>(b));
  }
  void check(const std::string& where, const Vec& a, const Vec& b) {
    if (!report.passed) return;
    if (a.size() != b.size()) {
      fail(where, "length mismatch");
      return;
    }
    for (int i = 0; i < a.size(); ++i) {
      if (!(a[i] == b[i])) {
        fail(where + "[" + std::to_string(i) + "]", a[i], b[i]);
        return;
      }
    }
  }
  void check(const std::string& where, const std::vector<Vec>& a,
             const std::vector<Vec>& b) {
    if (!report.passed) return;
    if (a.size() != b.size()) {
      fail(where, "length mismatch");
      return;
    }
    for (size_t i = 0; i < a.size(); ++i) {
      check(where + "[" + std::to_string(i) + "]", a[i], b[i]);
      if (!report.passed) return;
    }
  }
  void check(const std::string& where, const std::vector<double>& a,
             const std::vector<double>& b) {
    if (!report.passed) return;
    if (a.size() != b.size()) {
      fail(where, "length mismatch");
      return;
    }
    for (size_t i = 0; i < a.size(); ++i) {
      check(where + "[" + std::to_string(i) + "]", a[i], b[i]);
      if (!report.passed) return;
    }
  }
};

}  // namespace

ReplayReport compare_runs(const std::vector<RunResult>& archived,
                          const std::vector<RunResult>& fresh) {
  Comparator cmp;
  if (archived.size() != fresh.size()) {
    cmp.fail("runs", "count mismatch");
    return cmp.report;
  }
  for (size_t r = 0; r < archived.size(); ++r) {
    const std::string base = "run " + std::to_string(r) + " ";
    const auto& a = archived[r];
    const auto& f = fresh[r];

    if (a.steps.size() != f.steps.size()) {
      cmp.fail(base + "steps", "count mismatch");
      return cmp.report;
    }
    for (size_t k = 0; k < a.steps.size(); ++k) {
      const std::string w = base + "steps[" + std::to_string(k) + "]";
      cmp.check(w + ".t", a.steps[k].t, f.steps[k].t);
      cmp.check(w + ".x", a.steps[k].x, f.steps[k].x);
      cmp.check(w + ".u", a.steps[k].u, f.steps[k].u);
      if (!cmp.report.passed) return cmp.report;
    }

    if (a.belief.size() != f.belief.size()) {
      cmp.fail(base + "belief", "count mismatch");
      return cmp.report;
    }
    for (size_t k = 0; k < a.belief.size(); ++k) {
      const std::string w = base + "belief[" + std::to_string(k) + "]";
      const auto& ab = a.belief[k];
      const auto& fb = f.belief[k];
      cmp.check(w + ".t", ab.t, fb.t);
      cmp.check(w + ".map", ab.map_id, fb.map_id);
      cmp.check(w + ".truth_rep", ab.truth_representative,
                fb.truth_representative);
      cmp.check(w + ".truth_w", ab.truth_weight, fb.truth_weight);
      if (ab.merges != fb.merges) cmp.fail(w + ".merges", "mismatch");
      if (ab.particles.size() != fb.particles.size()) {
        cmp.fail(w + ".particles", "count mismatch");
      } else {
        for (size_t p = 0; p < ab.particles.size(); ++p) {
          const std::string wp = w + ".particles[" + std::to_string(p) + "]";
          cmp.check(wp + ".id", ab.particles[p].id, fb.particles[p].id);
          cmp.check(wp + ".logw", ab.particles[p].log_weight,
                    fb.particles[p].log_weight);
          cmp.check(wp + ".w", ab.particles[p].weight, fb.particles[p].weight);
          cmp.check(wp + ".pred", ab.particles[p].short_prediction,
                    fb.particles[p].short_prediction);
          if (!cmp.report.passed) return cmp.report;
        }
      }
      if (!cmp.report.passed) return cmp.report;
    }

    if (a.predictions.size() != f.predictions.size()) {
      cmp.fail(base + "predictions", "count mismatch");
      return cmp.report;
    }
    for (size_t k = 0; k < a.predictions.size(); ++k) {
      const std::string w = base + "predictions[" + std::to_string(k) + "]";
      cmp.check(w + ".origin", a.predictions[k].origin_step,
                f.predictions[k].origin_step);
      cmp.check(w + ".pos", a.predictions[k].positions,
                f.predictions[k].positions);
      if (!cmp.report.passed) return cmp.report;
    }

    cmp.check(base + "player_costs", a.player_costs, f.player_costs);
    cmp.check(base + "truth_particle", a.truth_particle_id,
              f.truth_particle_id);
    cmp.check(base + "truth_seed_params", a.truth_seed_params,
              f.truth_seed_params);
    if (!cmp.report.passed) return cmp.report;
  }
  return cmp.report;
}

ReplayReport compare_cluster(const ClusterOutcome& archived,
                             const ClusterOutcome& fresh) {
  Comparator cmp;
  if (archived.samples.size() != fresh.samples.size()) {
    cmp.fail("samples", "count mismatch");
    return cmp.report;
  }
  for (size_t i = 0; i < archived.samples.size(); ++i) {
    const std::string w = "samples[" + std::to_string(i) + "]";
    const auto& a = archived.samples[i];
    const auto& f = fresh.samples[i];
    cmp.check(w + ".i", a.index, f.index);
    cmp.check(w + ".converged", static_cast<int>(a.converged),
              static_cast<int>(f.converged));
    cmp.check(w + ".iterations", a.iterations, f.iterations);
    cmp.check(w + ".seed_params", a.seed_params, f.seed_params);
    cmp.check(w + ".costs", a.costs, f.costs);
    cmp.check(w + ".states", a.trajectory.states, f.trajectory.states);
    cmp.check(w + ".controls", a.trajectory.controls, f.trajectory.controls);
    if (!cmp.report.passed) return cmp.report;
  }
  cmp.check("chosen_k", archived.chosen_k, fresh.chosen_k);
  if (archived.clustering.assignment != fresh.clustering.assignment) {
    cmp.fail("assignment", "mismatch");
  }
  cmp.check("inertia", archived.clustering.inertia, fresh.clustering.inertia);
  if (archived.report.members != fresh.report.members) {
    cmp.fail("members", "mismatch");
  }
  return cmp.report;
}

}  // namespace eqalign
