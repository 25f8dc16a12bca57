// Python bindings. Structured values cross the boundary as JSON text; the
// hoi_imitate package turns them into dicts.

#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hoi/contact_graph.hpp"
#include "hoi/demo.hpp"
#include "hoi/error.hpp"
#include "hoi/experiment.hpp"
#include "hoi/metrics.hpp"
#include "hoi/model.hpp"
#include "hoi/policy.hpp"
#include "hoi/reward.hpp"
#include "hoi/sequence_io.hpp"
#include "hoi/train.hpp"

namespace py = pybind11;
using namespace hoi;

namespace {

ExperimentConfig config_from(const std::string& text) {
  return text.empty() ? ExperimentConfig{} : experiment_from_json(nlohmann::json::parse(text));
}

nlohmann::json breakdown_json(const RewardBreakdown& b) {
  return {{"r_p", b.r_p},   {"r_r", b.r_r},   {"r_pv", b.r_pv},   {"r_rv", b.r_rv},
          {"r_b", b.r_b},   {"r_op", b.r_op}, {"r_or", b.r_or},   {"r_opv", b.r_opv},
          {"r_orv", b.r_orv}, {"r_o", b.r_o}, {"r_ig", b.r_ig},   {"r_cg", b.r_cg},
          {"r_total", b.r_total}};
}

const RefHoiState& frame(const RefHoiSequence& seq, int index) {
  if (index < 0 || index >= seq.frame_count()) {
    throw Error(ErrorKind::kOutOfRange, "frame index out of range", index);
  }
  return seq.frames[static_cast<std::size_t>(index)];
}

}  // namespace

PYBIND11_MODULE(_hoi, m) {
  m.doc() = "Physics-based HOI imitation on a planar toy arm";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> hoi_error;
  hoi_error.call_once_and_store_result(
      [&]() { return py::exception<Error>(m, "HoiError", PyExc_RuntimeError); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      std::string msg = std::string(to_string(e.kind())) + ": " + e.what();
      if (e.index()) msg += " (index " + std::to_string(*e.index()) + ")";
      py::set_error(hoi_error.get_stored(), msg.c_str());
    } catch (const nlohmann::json::exception& e) {
      py::set_error(PyExc_ValueError, e.what());
    }
  });

  py::class_<RefHoiSequence>(m, "Sequence")
      .def_static("from_json", [](const std::string& text) {
        return sequence_from_json(nlohmann::json::parse(text));
      })
      .def_static("load", [](const std::string& path) { return load_sequence(path); })
      .def("save", [](const RefHoiSequence& s, const std::string& path) { save_sequence(s, path); })
      .def("to_json", [](const RefHoiSequence& s) { return sequence_to_json(s).dump(); })
      .def("validate", [](const RefHoiSequence& s) { return validate_sequence(s).warnings; })
      .def_property_readonly("frame_count", &RefHoiSequence::frame_count)
      .def_readonly("fps", &RefHoiSequence::fps)
      .def_property_readonly("body_names", [](const RefHoiSequence& s) { return s.layout.body_names; })
      .def_property_readonly("node_names", [](const RefHoiSequence& s) { return s.cg.node_names; })
      .def("cg_edges", [](const RefHoiSequence& s, int f) {
        const auto& e = frame(s, f).cg_edges;
        return std::vector<int>(e.begin(), e.end());
      })
      .def("body_positions", [](const RefHoiSequence& s, int f) {
        const auto& p = frame(s, f).body.pos;
        std::vector<std::vector<double>> out(static_cast<std::size_t>(p.rows()));
        for (int r = 0; r < p.rows(); ++r) out[r] = {p(r, 0), p(r, 1)};
        return out;
      })
      .def("object_positions", [](const RefHoiSequence& s, int f) {
        const auto& p = frame(s, f).object.pos;
        std::vector<std::vector<double>> out(static_cast<std::size_t>(p.rows()));
        for (int r = 0; r < p.rows(); ++r) out[r] = {p(r, 0), p(r, 1)};
        return out;
      })
      .def("__len__", &RefHoiSequence::frame_count);

  py::class_<ActorCritic>(m, "Policy")
      .def_static("load", [](const std::string& path) { return load_checkpoint(path).policy; })
      .def_property_readonly("state_dim", [](const ActorCritic& p) { return p.state_dim(); })
      .def_property_readonly("action_dim", [](const ActorCritic& p) { return p.action_dim(); });

  m.def(
      "generate_demo",
      [](const std::string& task, double duration, double bias) {
        auto script = demo::DemoScript::defaults(demo::task_from_string(task));
        if (duration > 0.0) script.duration = duration;
        if (bias >= 0.0) script.bias = bias;
        script.validate();
        return demo::generate(script, Embodiment::toy_arm());
      },
      py::arg("task"), py::arg("duration") = 0.0, py::arg("bias") = -1.0,
      "Synthetic reference for hold, carry, toss_catch or biased_hold.");

  m.def(
      "extract_cg",
      [](const std::vector<std::pair<std::string, std::string>>& pairs,
         const std::vector<std::string>& nodes, const std::map<std::string, int>& assignment) {
        AggregationMap map;
        map.node_names = nodes;
        map.assignment = assignment;
        map.validate();
        ContactEvidence ev;
        ev.pairs = pairs;
        const auto e = extract_cg(ev, map).edges;
        return std::vector<int>(e.begin(), e.end());
      },
      py::arg("pairs"), py::arg("node_names"), py::arg("assignment"));

  m.def("cg_error", [](const std::vector<std::uint8_t>& sim, const std::vector<std::uint8_t>& ref) {
    const auto e = cg_error(sim, ref);
    return std::vector<int>(e.begin(), e.end());
  });

  m.def(
      "reward",
      [](const RefHoiSequence& sim, int sim_frame, const RefHoiSequence& ref, int ref_frame,
         const std::string& mode, const std::string& preset) {
        const RewardWeights w = preset == "grab" ? RewardWeights::grab() : RewardWeights::ball_play();
        if (preset != "grab" && preset != "ball_play") {
          throw Error(ErrorKind::kInvalidArgument, "unknown weight preset '" + preset + "'");
        }
        return breakdown_json(total_reward(frame(sim, sim_frame), frame(ref, ref_frame), w,
                                           reward_mode_from_string(mode)))
            .dump();
      },
      py::arg("sim"), py::arg("sim_frame"), py::arg("ref"), py::arg("ref_frame"),
      py::arg("mode") = "multiplicative", py::arg("preset") = "ball_play",
      "Reward channels of one frame against another, as JSON.");

  m.def(
      "replay",
      [](const RefHoiSequence& seq, const std::string& config) {
        const ExperimentConfig cfg = config_from(config);
        const Rollout r = kinematic_replay(seq, cfg.embodiment, cfg.sim);
        RefHoiSequence out = seq;
        out.frames = r.states;
        return py::make_tuple(out, r.penetration);
      },
      py::arg("seq"), py::arg("config") = "",
      "Kinematic playback through the simulator: (recorded sequence, per-frame penetration).");

  m.def(
      "evaluate_replay",
      [](const RefHoiSequence& seq, const std::string& config) {
        const ExperimentConfig cfg = config_from(config);
        return to_json(score_rollouts({kinematic_replay(seq, cfg.embodiment, cfg.sim)}, seq)).dump();
      },
      py::arg("seq"), py::arg("config") = "");

  m.def(
      "train",
      [](const RefHoiSequence& seq, const std::string& config, const std::string& output_dir) {
        const ExperimentConfig cfg = config_from(config);
        cfg.validate();
        TrainOptions opt;
        opt.output_dir = output_dir;
        py::gil_scoped_release release;
        return train(seq, cfg, opt).policy;
      },
      py::arg("seq"), py::arg("config") = "", py::arg("output_dir") = "");

  m.def(
      "evaluate",
      [](const ActorCritic& policy, const RefHoiSequence& seq, const std::string& config,
         int repeats) {
        const ExperimentConfig cfg = config_from(config);
        py::gil_scoped_release release;
        return to_json(evaluate(policy, seq, cfg, repeats)).dump();
      },
      py::arg("policy"), py::arg("seq"), py::arg("config") = "", py::arg("repeats") = 10);

  m.def(
      "export_rectified",
      [](const ActorCritic& policy, const RefHoiSequence& seq, const std::string& config,
         const std::string& path) {
        const auto r = export_rectified(policy, seq, config_from(config), path);
        return py::make_tuple(r.sequence, r.max_penetration, r.frames_over_slop);
      },
      py::arg("policy"), py::arg("seq"), py::arg("config") = "", py::arg("path") = "");

  m.def("default_config", [] { return to_json(ExperimentConfig{}).dump(); });
}
