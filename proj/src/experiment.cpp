// Copyright 2026 The Lanemon Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lanemon/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <thread>
#include <utility>

#include "lanemon/common.hpp"
#include "lanemon/episode.hpp"
#include "lanemon/track.hpp"

namespace fs = std::filesystem;

namespace lanemon::eval {
namespace {

// Runs fn(worker, index) for every index with up to `workers` threads. The
// worker id lets callers keep per-thread state (render contexts are not
// thread-safe). Exceptions propagate after all workers stop.
void parallel_run(int n, int workers,
                  const std::function<void(int, int)>& fn) {
  workers = std::max(1, std::min(workers, n));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(0, i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mu;
  std::exception_ptr err;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (;;) {
        int i = next.fetch_add(1);
        if (i >= n) return;
        {
          std::lock_guard<std::mutex> lk(err_mu);
          if (err) return;
        }
        try {
          fn(w, i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!err) err = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

sim::CameraParams camera_for(const ModelConfig& mc) {
  sim::CameraParams cam;
  cam.width = mc.cam_w;
  cam.height = mc.cam_h;
  return cam;
}

// The pool model a mutant recording condition points at.
const mutate::MutantModel* pool_model(const mutate::MutantPool& pool,
                                      const sim::RecordingCondition& c) {
  mutate::Operator op = mutate::operator_from_name(c.mutant_op);
  std::vector<const mutate::MutantModel*> models = pool.find(op, c.mutant_param);
  if (c.model_index < 0 || c.model_index >= static_cast<int>(models.size()))
    throw MissingPrerequisite(
        "train", strfmt("mutant pool has no model %d under %s %.6g",
                        c.model_index, c.mutant_op.c_str(), c.mutant_param));
  return models[c.model_index];
}

double last_finite_loss(const nn::TrainResult& tr) {
  if (tr.kept_epochs <= 0 || tr.epoch_loss.empty()) return 0.0;
  int last = std::min<int>(tr.kept_epochs, static_cast<int>(tr.epoch_loss.size()));
  return tr.epoch_loss[last - 1];
}

const char* condition_dataset(const sim::RecordingCondition& c) {
  switch (c.kind) {
    case sim::RecordingCondition::kAnomaly:
      return "anomaly";
    case sim::RecordingCondition::kMutant:
      return "mutant";
    default:
      return "nominal";
  }
}

const monitor::OracleTrace& trace_of(
    const std::map<std::string, monitor::OracleTrace>& traces,
    const std::string& oracle_id, const std::string& recording_id) {
  auto it = traces.find(oracle_id);
  LANEMON_CHECK(it != traces.end(), "trace file for '" + recording_id +
                                        "' lacks oracle '" + oracle_id + "'");
  return it->second;
}

}  // namespace

void validate_plan(const ExperimentPlan& plan) {
  auto fail = [](const std::string& m) {
    throw std::invalid_argument("plan: " + m);
  };
  if (plan.circuits.empty()) fail("needs at least one circuit");
  {
    std::vector<std::string> known = sim::builtin_track_ids();
    std::set<std::string> seen;
    for (const std::string& c : plan.circuits) {
      if (std::find(known.begin(), known.end(), c) == known.end())
        fail("unknown circuit '" + c + "'");
      if (!seen.insert(c).second) fail("duplicate circuit '" + c + "'");
    }
  }
  if (plan.calibration_laps < 1) fail("calibration_laps must be >= 1");
  if (plan.eval_laps < 1) fail("eval_laps must be >= 1");
  if (plan.lap_frames < 1) fail("lap_frames must be >= 1");
  if (plan.run_frames < 1) fail("run_frames must be >= 1");
  if (plan.anomaly_onset < 0 || plan.anomaly_onset >= plan.run_frames)
    fail("anomaly_onset must lie within the run's frame range");
  {
    std::set<std::pair<std::string, int>> seen;
    for (const AnomalyPlanEntry& a : plan.anomalies) {
      corrupt::kind_from_string(a.kind);  // rejects unknown kinds
      if (a.severities.empty())
        fail("anomaly '" + a.kind + "' lists no severities");
      for (int s : a.severities) {
        if (s < 1 || s > 5)
          fail(strfmt("severity %d out of range for '%s'", s, a.kind.c_str()));
        if (!seen.insert({a.kind, s}).second)
          fail(strfmt("duplicate anomaly entry '%s' severity %d",
                      a.kind.c_str(), s));
      }
      if (a.repeats < 1) fail("anomaly repeats must be >= 1");
    }
  }
  {
    std::set<std::pair<std::string, double>> seen;
    for (const MutantPlanEntry& m : plan.mutants) {
      mutate::Operator op = mutate::operator_from_name(m.op);
      if (op == mutate::Operator::kHLR) {
        if (m.param <= 0.0) fail("HLR parameter must be a positive rate");
      } else if (m.param < 0.0 || m.param >= 1.0) {
        fail("TAN/TCL parameter must be a fraction in [0, 1)");
      }
      if (!seen.insert({m.op, m.param}).second)
        fail(strfmt("duplicate mutant entry %s %.6g", m.op.c_str(), m.param));
      if (m.models < 1) fail("mutant models must be >= 1");
      if (m.repeats < 1) fail("mutant repeats must be >= 1");
    }
  }
  if (plan.reaction_offsets.empty()) fail("needs at least one reaction offset");
  std::set<int> offs;
  for (int o : plan.reaction_offsets) {
    if (o > 0) fail("reaction offsets must be <= 0");
    if (!offs.insert(o).second) fail("duplicate reaction offset");
  }
}

std::vector<RecordingJob> plan_recordings(const ExperimentPlan& plan) {
  validate_plan(plan);
  std::vector<RecordingJob> jobs;
  auto add = [&](std::string id, const std::string& circuit,
                 sim::RecordingCondition cond, bool calibration,
                 int max_frames) {
    RecordingJob j;
    j.id = std::move(id);
    j.circuit = circuit;
    j.condition = std::move(cond);
    j.seed = derive_seed(plan.seed, j.id);
    j.calibration = calibration;
    j.max_frames = max_frames;
    jobs.push_back(std::move(j));
  };

  const std::string& cal_circuit = plan.circuits.front();
  for (int i = 0; i < plan.calibration_laps; ++i)
    add(strfmt("%s-cal-%02d", cal_circuit.c_str(), i), cal_circuit,
        sim::RecordingCondition::nominal(), true, plan.lap_frames);

  for (const std::string& circuit : plan.circuits)
    for (int i = 0; i < plan.eval_laps; ++i)
      add(strfmt("%s-nom-%02d", circuit.c_str(), i), circuit,
          sim::RecordingCondition::nominal(), false, plan.lap_frames);

  for (const std::string& circuit : plan.circuits)
    for (const AnomalyPlanEntry& a : plan.anomalies)
      for (int s : a.severities)
        for (int r = 0; r < a.repeats; ++r)
          add(strfmt("%s-anom-%s-s%d-r%d", circuit.c_str(), a.kind.c_str(), s,
                     r),
              circuit,
              sim::RecordingCondition::anomaly(a.kind, s, plan.anomaly_onset),
              false, plan.run_frames);

  for (const std::string& circuit : plan.circuits)
    for (const MutantPlanEntry& m : plan.mutants) {
      mutate::MutationSpec spec;
      spec.op = mutate::operator_from_name(m.op);
      spec.param = m.param;
      const std::string tag = spec.tag();
      for (int mi = 0; mi < m.models; ++mi)
        for (int r = 0; r < m.repeats; ++r)
          add(strfmt("%s-mut-%s-m%02d-r%d", circuit.c_str(), tag.c_str(), mi,
                     r),
              circuit, sim::RecordingCondition::mutant(m.op, m.param, mi),
              false, plan.run_frames);
    }

  std::set<std::string> ids;
  for (const RecordingJob& j : jobs)
    LANEMON_CHECK(ids.insert(j.id).second, "duplicate recording id " + j.id);
  return jobs;
}

Artifacts load_artifacts(const WorkspacePaths& ws, const ModelConfig& mc,
                         bool need_mutants) {
  Artifacts a;
  const nn::NetSpec spec = mc.controller_spec();
  if (!fs::exists(ws.controller_file()))
    throw MissingPrerequisite(
        "train", "no controller weights at " + ws.controller_file().string());
  a.controller =
      std::make_shared<nn::Net<float>>(nn::load_net(spec, ws.controller_file()));

  if (!fs::exists(ws.sae_file()))
    throw MissingPrerequisite(
        "train",
        "no reconstruction-monitor weights at " + ws.sae_file().string());
  a.sae = std::make_shared<baselines::SaeModel>(baselines::load_sae(
      ws.sae_file(), mc.cam_h, mc.cam_w, mc.sae_hidden, mc.sae_down));

  if (!fs::exists(ws.ensemble_dir() / "ensemble.json"))
    throw MissingPrerequisite(
        "train", "no ensemble weights at " + ws.ensemble_dir().string());
  a.ensemble = std::make_shared<baselines::Ensemble>(
      baselines::load_ensemble(spec, ws.ensemble_dir()));

  if (need_mutants) {
    if (!fs::exists(ws.mutants_dir() / "pool.json"))
      throw MissingPrerequisite(
          "train", "no mutant pool at " + ws.mutants_dir().string());
    a.pool = mutate::load_mutant_pool(ws.mutants_dir());
  }
  return a;
}

monitor::Controller make_net_controller(
    std::shared_ptr<const nn::Net<float>> net) {
  LANEMON_CHECK(net != nullptr, "controller net is null");
  LANEMON_CHECK(net->out_dim() == 2, "controller net must emit two outputs");
  return [net](const img::Image& im) {
    nn::Mat<float> out = net->forward(nn::to_input(im));
    return sim::Controls{static_cast<double>(out(0, 0)),
                         static_cast<double>(out(1, 0))};
  };
}

const std::vector<std::string>& canonical_oracles() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v;
    for (const monitor::MRDef& mr : monitor::builtin_mrs())
      v.push_back("mr/" + mr.id);
    v.push_back("selforacle/sae");
    v.push_back("ensemble");
    return v;
  }();
  return ids;
}

StageOutcome run_training(const WorkspacePaths& ws, const ExperimentPlan& plan,
                          const ModelConfig& mc, const TrainOptions& opt) {
  validate_plan(plan);
  fs::create_directories(ws.weights_dir());
  StageOutcome out;
  const nn::NetSpec ctrl_spec = mc.controller_spec();

  std::optional<nn::ImageDataset> ds;
  auto dataset = [&]() -> const nn::ImageDataset& {
    if (!ds) {
      ds = sim::collect_dataset(opt.dataset);
      LANEMON_CHECK(ds->in_h == mc.cam_h && ds->in_w == mc.cam_w,
                    "training frames do not match the configured camera");
    }
    return *ds;
  };

  if (!opt.force && fs::exists(ws.controller_file())) {
    ++out.reused;
  } else {
    const nn::ImageDataset& d = dataset();
    nn::Net<float> net(ctrl_spec);
    net.init_weights(opt.controller.seed);
    nn::TrainResult tr =
        nn::train_sgd(&net, static_cast<int>(d.images.size()),
                      nn::make_image_batch_fill(d), opt.controller);
    nn::NetMeta meta;
    meta.seed = opt.controller.seed;
    meta.epochs = static_cast<int>(tr.epoch_loss.size());
    meta.diverged = tr.diverged;
    meta.final_loss = last_finite_loss(tr);
    nn::save_net(net, meta, ws.controller_file());
    ++out.computed;
  }

  if (!opt.force && fs::exists(ws.sae_file())) {
    ++out.reused;
  } else {
    baselines::SaeModel sae = baselines::sae_train(dataset().images, opt.sae);
    baselines::save_sae(sae, ws.sae_file());
    ++out.computed;
  }

  if (!opt.force && fs::exists(ws.ensemble_dir() / "ensemble.json")) {
    ++out.reused;
  } else {
    baselines::Ensemble e =
        baselines::ensemble_train(ctrl_spec, dataset(), opt.ensemble);
    baselines::save_ensemble(e, ws.ensemble_dir());
    ++out.computed;
  }

  if (!plan.mutants.empty()) {
    // The spread monitor needs at least two models per fault spec.
    int models = 2;
    std::vector<mutate::MutationSpec> specs;
    for (const MutantPlanEntry& m : plan.mutants) {
      mutate::MutationSpec s;
      s.op = mutate::operator_from_name(m.op);
      s.param = m.param;
      s.model_seed = derive_seed(plan.seed, "mutant:" + s.tag());
      specs.push_back(s);
      models = std::max(models, m.models);
    }

    bool covered = false;
    if (!opt.force && fs::exists(ws.mutants_dir() / "pool.json")) {
      try {
        mutate::MutantPool pool = mutate::load_mutant_pool(ws.mutants_dir());
        covered = true;
        for (const mutate::MutationSpec& s : specs)
          if (static_cast<int>(pool.find(s.op, s.param).size()) < models)
            covered = false;
      } catch (const std::exception&) {
        covered = false;
      }
    }
    if (covered) {
      ++out.reused;
    } else {
      mutate::MutantPool pool =
          mutate::build_mutant_pool(ctrl_spec, dataset(), opt.controller,
                                    specs, models, ws.mutants_dir(), opt.force);
      out.computed += static_cast<int>(pool.models.size());
    }
  }
  return out;
}

StageOutcome run_recordings(const WorkspacePaths& ws,
                            const ExperimentPlan& plan, const ModelConfig& mc,
                            const corrupt::SeverityTable& table, int jobs) {
  std::vector<RecordingJob> all = plan_recordings(plan);
  fs::create_directories(ws.recordings_dir());

  StageOutcome out;
  std::vector<int> todo;
  for (int i = 0; i < static_cast<int>(all.size()); ++i) {
    if (fs::exists(ws.recording_dir(all[i].id) / "manifest.json"))
      ++out.reused;
    else
      todo.push_back(i);
  }
  if (todo.empty()) return out;

  bool need_mutants = false;
  for (int i : todo)
    need_mutants |=
        all[i].condition.kind == sim::RecordingCondition::kMutant;
  Artifacts art = load_artifacts(ws, mc, need_mutants);
  const nn::NetSpec ctrl_spec = mc.controller_spec();

  // Load the fault-trained nets up front so workers only read shared state.
  std::map<std::string, std::shared_ptr<nn::Net<float>>> mutant_nets;
  for (int i : todo) {
    const sim::RecordingCondition& c = all[i].condition;
    if (c.kind != sim::RecordingCondition::kMutant) continue;
    const mutate::MutantModel* mm = pool_model(art.pool, c);
    if (!mutant_nets.count(mm->weight_file))
      mutant_nets[mm->weight_file] = std::make_shared<nn::Net<float>>(
          nn::load_net(ctrl_spec, art.pool.weight_path(*mm)));
  }

  const int n = static_cast<int>(todo.size());
  const int workers = std::max(1, std::min(jobs, n));
  std::vector<std::map<std::string, std::unique_ptr<sim::RenderContext>>>
      contexts(workers);

  parallel_run(n, workers, [&](int w, int k) {
    const RecordingJob& job = all[todo[k]];
    auto& cache = contexts[w];
    auto it = cache.find(job.circuit);
    if (it == cache.end())
      it = cache
               .emplace(job.circuit, std::make_unique<sim::RenderContext>(
                                         sim::build_track(job.circuit),
                                         camera_for(mc)))
               .first;
    const sim::RenderContext& ctx = *it->second;

    const sim::RecordingCondition& cond = job.condition;
    std::shared_ptr<const nn::Net<float>> net = art.controller;
    sim::TransformFn transform;
    if (cond.kind == sim::RecordingCondition::kAnomaly) {
      corrupt::CorruptionSpec cs;
      cs.kind = corrupt::kind_from_string(cond.corruption);
      cs.severity = cond.severity;
      cs.onset_frame = cond.onset_frame;
      cs.seed = derive_seed(job.seed, "corruption");
      auto stream = corrupt::corruption_stream(table, cs);
      transform = [stream](img::Image&& im, int t) { return stream(im, t); };
    } else if (cond.kind == sim::RecordingCondition::kMutant) {
      const mutate::MutantModel* mm = pool_model(art.pool, cond);
      net = mutant_nets.at(mm->weight_file);
    }
    monitor::Controller ctl = make_net_controller(net);
    sim::ControlFn act = [ctl](const img::Image& im, int) { return ctl(im); };

    sim::EpisodeOptions opt;
    opt.max_frames = job.max_frames;
    opt.stop_on_lap = true;
    opt.stop_on_oob = true;
    opt.seed = job.seed;
    SplitMix64 g(derive_seed(job.seed, "start"));
    opt.start_frac = g.uniform();
    opt.start_lateral_jitter = 0.03;
    opt.start_heading_jitter = 0.05;

    sim::EpisodeResult ep =
        sim::run_controlled_episode(ctx, act, transform, {}, opt);
    sim::Recording rec =
        sim::make_recording(job.id, job.circuit, job.seed, cond, ep);
    sim::save_recording(rec, ws.recording_dir(job.id));
  });
  out.computed = n;
  return out;
}

StageOutcome ensure_traces(const WorkspacePaths& ws,
                           const std::vector<RecordingJob>& jobs,
                           const ModelConfig& mc, int n_jobs) {
  fs::create_directories(ws.traces_dir());
  StageOutcome out;
  std::vector<int> todo;
  for (int i = 0; i < static_cast<int>(jobs.size()); ++i) {
    if (fs::exists(ws.trace_file(jobs[i].id)))
      ++out.reused;
    else
      todo.push_back(i);
  }
  if (todo.empty()) return out;

  bool need_mutants = false;
  for (int i : todo) {
    const RecordingJob& j = jobs[i];
    if (!fs::exists(ws.recording_dir(j.id) / "manifest.json"))
      throw MissingPrerequisite("record",
                                "no recording '" + j.id + "' in workspace");
    need_mutants |= j.condition.kind == sim::RecordingCondition::kMutant;
  }

  Artifacts art = load_artifacts(ws, mc, need_mutants);
  const nn::NetSpec ctrl_spec = mc.controller_spec();

  // Per-model nets plus the per-fault-spec model groups for the spread
  // monitor, loaded up front.
  std::map<std::string, std::shared_ptr<nn::Net<float>>> mutant_nets;
  std::map<std::string, std::shared_ptr<baselines::Ensemble>> mutant_groups;
  for (int i : todo) {
    const sim::RecordingCondition& c = jobs[i].condition;
    if (c.kind != sim::RecordingCondition::kMutant) continue;
    const mutate::MutantModel* mm = pool_model(art.pool, c);
    if (!mutant_nets.count(mm->weight_file))
      mutant_nets[mm->weight_file] = std::make_shared<nn::Net<float>>(
          nn::load_net(ctrl_spec, art.pool.weight_path(*mm)));
    const std::string tag = mm->spec.tag();
    if (!mutant_groups.count(tag))
      mutant_groups[tag] =
          std::make_shared<baselines::Ensemble>(baselines::ensemble_for_mutant(
              art.pool, ctrl_spec, mm->spec.op, mm->spec.param));
  }

  const int n = static_cast<int>(todo.size());
  parallel_run(n, std::min(n_jobs, n), [&](int, int k) {
    const RecordingJob& job = jobs[todo[k]];
    sim::Recording rec = sim::load_recording(ws.recording_dir(job.id));
    const sim::RecordingCondition& cond = rec.meta.condition;

    std::shared_ptr<const nn::Net<float>> net = art.controller;
    std::shared_ptr<const baselines::Ensemble> group = art.ensemble;
    if (cond.kind == sim::RecordingCondition::kMutant) {
      const mutate::MutantModel* mm = pool_model(art.pool, cond);
      net = mutant_nets.at(mm->weight_file);
      group = mutant_groups.at(mm->spec.tag());
    }

    const std::uint64_t run_seed = rec.meta.seed;
    monitor::Controller ctl = make_net_controller(net);
    std::vector<monitor::OracleTrace> traces =
        monitor::replay_mr_traces(rec, ctl, monitor::builtin_mrs(), run_seed);
    {
      baselines::SaeOracle sae(*art.sae);
      traces.push_back(monitor::replay_trace(rec, sae, run_seed));
    }
    {
      baselines::EnsembleOracle ens(*group);
      traces.push_back(monitor::replay_trace(rec, ens, run_seed));
    }
    monitor::save_traces(traces, ws.trace_file(job.id));
  });
  out.computed = n;
  return out;
}

monitor::ThresholdSet run_calibration(const WorkspacePaths& ws,
                                      const ExperimentPlan& plan,
                                      const ModelConfig& mc, int jobs) {
  std::vector<RecordingJob> all = plan_recordings(plan);
  std::vector<RecordingJob> cal;
  for (RecordingJob& j : all)
    if (j.calibration) cal.push_back(std::move(j));
  LANEMON_CHECK(!cal.empty(), "plan has no calibration laps");

  ensure_traces(ws, cal, mc, jobs);

  std::vector<monitor::RecordingTraces> traces;
  traces.reserve(cal.size());
  for (const RecordingJob& j : cal) {
    monitor::RecordingTraces rt;
    rt.recording_id = j.id;
    rt.oracles = monitor::load_traces(ws.trace_file(j.id));
    traces.push_back(std::move(rt));
  }
  monitor::ThresholdSet ts = monitor::calibrate_thresholds(traces);
  monitor::save_thresholds(ts, ws.thresholds_file());
  return ts;
}

namespace {

struct LoadedRecording {
  sim::RecordingMeta meta;
  std::map<std::string, monitor::OracleTrace> traces;
};

MetricsReport frame_level_report(
    const ExperimentPlan& plan, const std::vector<RecordingJob>& evals,
    const std::map<std::string, LoadedRecording>& data,
    const monitor::ThresholdSet& ts) {
  MetricsReport fr;
  fr.granularity = "frame";

  std::vector<std::string> datasets;
  if (!plan.anomalies.empty()) datasets.push_back("anomaly");
  if (!plan.mutants.empty()) datasets.push_back("mutant");

  for (const std::string& dataset : datasets)
    for (const std::string& circuit : plan.circuits)
      for (const std::string& oracle : canonical_oracles()) {
        const monitor::ThresholdEntry& thr = ts.at(oracle);
        ReportRow row;
        row.oracle_id = oracle;
        row.dataset = dataset;
        row.circuit = circuit;
        row.reaction_offset = 0;
        std::vector<double> ps, ns;
        for (const RecordingJob& j : evals) {
          if (j.circuit != circuit) continue;
          const LoadedRecording& l = data.at(j.id);
          const monitor::OracleTrace& tr = trace_of(l.traces, oracle, j.id);
          const std::string kind = condition_dataset(l.meta.condition);
          if (kind == "nominal") {
            for (double s : tr.smoothed) {
              ns.push_back(s);
              s > thr.value ? ++row.counts.fp : ++row.counts.tn;
            }
          } else if (kind == dataset) {
            if (l.meta.oob_frame < 0) {
              ++row.counts.excluded;
              continue;
            }
            int lo = l.meta.condition.kind == sim::RecordingCondition::kAnomaly
                         ? std::max(0, l.meta.condition.onset_frame)
                         : 0;
            for (int t = lo; t < static_cast<int>(tr.smoothed.size()); ++t) {
              double s = tr.smoothed[t];
              ps.push_back(s);
              s > thr.value ? ++row.counts.tp : ++row.counts.fn;
            }
          }
        }
        row.values = metrics(row.counts);
        if (ps.empty() || ns.empty())
          row.auc_defined = false;
        else
          row.areas = auc(ps, ns);
        fr.rows.push_back(std::move(row));
      }
  return fr;
}

}  // namespace

MetricsReport run_evaluation(const WorkspacePaths& ws,
                             const ExperimentPlan& plan, const ModelConfig& mc,
                             const EvalOptions& opt) {
  std::vector<RecordingJob> all = plan_recordings(plan);
  std::vector<RecordingJob> evals;
  for (RecordingJob& j : all)
    if (!j.calibration) evals.push_back(std::move(j));

  if (!fs::exists(ws.thresholds_file()))
    throw MissingPrerequisite("calibrate", "no thresholds in workspace");
  monitor::ThresholdSet ts = monitor::load_thresholds(ws.thresholds_file());

  {
    std::set<std::string> prov(ts.provenance.begin(), ts.provenance.end());
    for (const RecordingJob& j : evals)
      LANEMON_CHECK(!prov.count(j.id), "evaluation recording '" + j.id +
                                           "' was used for calibration");
  }

  ensure_traces(ws, evals, mc, opt.jobs);

  std::map<std::string, LoadedRecording> data;
  for (const RecordingJob& j : evals) {
    LoadedRecording l;
    l.meta = sim::load_recording_meta(ws.recording_dir(j.id));
    for (monitor::OracleTrace& tr : monitor::load_traces(ws.trace_file(j.id)))
      l.traces.emplace(tr.oracle_id, std::move(tr));
    data.emplace(j.id, std::move(l));
  }

  std::vector<std::string> datasets;
  if (!plan.anomalies.empty()) datasets.push_back("anomaly");
  if (!plan.mutants.empty()) datasets.push_back("mutant");

  MetricsReport report;
  if (datasets.empty())
    report.warnings.push_back(
        "plan defines no failing recordings; nothing to score");
  std::set<std::string> excluded_ids;

  for (const std::string& dataset : datasets)
    for (const std::string& circuit : plan.circuits) {
      std::vector<const RecordingJob*> pos, neg;
      for (const RecordingJob& j : evals) {
        if (j.circuit != circuit) continue;
        const std::string kind = condition_dataset(j.condition);
        if (kind == "nominal")
          neg.push_back(&j);
        else if (kind == dataset)
          pos.push_back(&j);
      }

      int scoreable = 0;
      for (const RecordingJob* j : pos)
        if (data.at(j->id).meta.oob_frame >= 0) ++scoreable;
      if (scoreable == 0)
        report.warnings.push_back(
            dataset + "/" + circuit +
            ": no failing recording reached out-of-bounds; areas undefined");

      for (int offset : plan.reaction_offsets)
        for (const std::string& oracle : canonical_oracles()) {
          const monitor::ThresholdEntry& thr = ts.at(oracle);
          ScoreOptions so;
          so.reaction_offset = offset;
          so.strict_post_onset = opt.strict_post_onset;

          ReportRow row;
          row.oracle_id = oracle;
          row.dataset = dataset;
          row.circuit = circuit;
          row.reaction_offset = offset;

          std::vector<double> ps, ns;
          for (const RecordingJob* j : pos) {
            const LoadedRecording& l = data.at(j->id);
            OracleVerdict v =
                make_verdict(l.meta, trace_of(l.traces, oracle, j->id), thr, so);
            std::optional<Outcome> oc = classify(v, l.meta, -offset);
            if (!oc) {
              ++row.counts.excluded;
              excluded_ids.insert(j->id);
              continue;
            }
            row.counts.add(*oc);
            ps.push_back(v.score);
          }
          for (const RecordingJob* j : neg) {
            const LoadedRecording& l = data.at(j->id);
            OracleVerdict v =
                make_verdict(l.meta, trace_of(l.traces, oracle, j->id), thr, so);
            std::optional<Outcome> oc = classify(v, l.meta, -offset);
            LANEMON_CHECK(oc.has_value(), "nominal recording must classify");
            row.counts.add(*oc);
            ns.push_back(v.score);
          }

          row.values = metrics(row.counts);
          if (ps.empty() || ns.empty())
            row.auc_defined = false;
          else
            row.areas = auc(ps, ns);
          report.rows.push_back(std::move(row));
        }
    }

  for (const std::string& id : excluded_ids)
    report.warnings.push_back(
        "excluded " + id +
        ": labeled failing but finished without an out-of-bounds event");

  fs::create_directories(ws.reports_dir());

  std::vector<monitor::AlarmEvent> alarms;
  for (const RecordingJob& j : evals) {
    const LoadedRecording& l = data.at(j.id);
    for (const std::string& oracle : canonical_oracles()) {
      std::optional<monitor::AlarmEvent> a = monitor::first_alarm(
          j.id, trace_of(l.traces, oracle, j.id), ts.at(oracle));
      if (a) alarms.push_back(std::move(*a));
    }
  }
  monitor::save_alarms(alarms, ws.alarms_file());

  save_report_csv(report, ws.report_file());
  if (opt.markdown)
    write_file_atomic(ws.summary_file(), report_markdown(report));
  if (opt.frame_level)
    save_report_csv(frame_level_report(plan, evals, data, ts),
                    ws.frame_report_file());
  return report;
}

MetricsReport run_experiment(const WorkspacePaths& ws,
                             const ExperimentPlan& plan, const ModelConfig& mc,
                             const corrupt::SeverityTable& table,
                             const EvalOptions& opt) {
  run_recordings(ws, plan, mc, table, opt.jobs);
  run_calibration(ws, plan, mc, opt.jobs);
  return run_evaluation(ws, plan, mc, opt);
}

}  // namespace lanemon::eval
