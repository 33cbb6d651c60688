#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "sitfuzz/closed_loop.hpp"
#include "sitfuzz/service.hpp"

namespace py = pybind11;
using namespace sitfuzz;
using nlohmann::json;

// Structured values cross the boundary as JSON text; the Python package
// decodes them.

namespace {

KnowledgeBasePtr loadText(const std::string &text) { return std::make_shared<const KnowledgeBase>(loadKnowledgeBase(std::string_view(text))); }

std::string validateText(const std::string &text) {
  const auto report = validateKnowledgeBase(parseKnowledgeBase(json::parse(text)));
  json issues = json::array();
  for (const auto &i : report.issues) {
    issues.push_back({{"severity", i.severity == ValidationIssue::Severity::Error ? "error" : "warning"},
                      {"location", i.location},
                      {"message", i.message},
                      {"offending_id", i.offending_id}});
  }
  return dumpJson({{"ok", report.ok()}, {"issues", issues}});
}

std::string inferJson(const KnowledgeBase &kb, const std::string &premises, const std::optional<std::string> &level) {
  const auto p = premisesFromJson(json::parse(premises), kb);
  const auto result = level ? inferAtLevel(p, kb, levelFromString(*level)) : inferAllLevels(p, kb);
  return dumpJson(inferenceToJson(result, kb));
}

std::string parseJson(const KnowledgeBase &kb, const std::string &utterance, const std::string &language) {
  const auto act = parseUtterance(utterance, language, kb, {kb.dictionary.default_domain});
  return dumpJson(
      {{"kind", toString(act.kind)}, {"arguments", act.arguments}, {"confidence", act.confidence}, {"language", act.language}});
}

std::string simulateCsv(const KnowledgeBase &kb, int steps, const std::string &policy, double theta,
                        std::optional<std::uint64_t> seed, const std::map<std::string, std::pair<double, double>> &bounds,
                        const std::map<std::string, double> &initial) {
  auto start = makePlant(kb.plant)->initialState();
  for (const auto &[name, value] : initial) start.variables[name] = value;
  DisturbanceProfile profile;
  if (!bounds.empty()) profile.seeded = DisturbanceProfile::Seeded{seed.value_or(0), bounds};
  return exportTrajectoryCsv(runClosedLoop(kb, start, steps, profile, policyFromString(policy), theta), kb.plant);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Situational fuzzy control engine";

  static py::exception<Error> base(m, "SitfuzzError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error &e) {
      py::object err = py::reinterpret_borrow<py::object>(base.ptr())(e.what());
      err.attr("code") = e.code();
      PyErr_SetObject(base.ptr(), err.ptr());
    } catch (const json::exception &e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  py::class_<KnowledgeBase, std::shared_ptr<KnowledgeBase>>(m, "KnowledgeBase")
      .def_property_readonly("version", [](const KnowledgeBase &kb) { return kb.version; })
      .def_property_readonly("variables",
                             [](const KnowledgeBase &kb) {
                               std::vector<std::string> out;
                               for (const auto &v : kb.variables) out.push_back(v.name);
                               return out;
                             })
      .def_property_readonly("acts",
                             [](const KnowledgeBase &kb) {
                               std::vector<std::string> out;
                               for (const auto &a : kb.acts) out.push_back(a.id);
                               return out;
                             })
      .def_property_readonly("languages", [](const KnowledgeBase &kb) { return kb.dictionary.languages; })
      .def("terms",
           [](const KnowledgeBase &kb, const std::string &variable) {
             std::vector<std::pair<std::string, std::vector<double>>> out;
             for (const auto &t : kb.variable(variable).terms) out.emplace_back(t.label, t.set.mu);
             return out;
           })
      .def("points", [](const KnowledgeBase &kb, const std::string &variable) { return kb.variable(variable).universe->points; })
      .def("_to_json", [](const KnowledgeBase &kb) { return dumpJson(serializeKnowledgeBase(kb)); })
      .def("_infer", &inferJson, py::arg("premises"), py::arg("level") = std::nullopt)
      .def("_parse", &parseJson, py::arg("utterance"), py::arg("language") = "en")
      .def("synthesize_echo",
           [](const KnowledgeBase &kb, const std::string &utterance, const std::string &language) {
             const auto act = parseUtterance(utterance, language, kb, {kb.dictionary.default_domain});
             return synthesize(Echo{act}, language, kb);
           })
      .def("simulate", &simulateCsv, py::arg("steps") = 100, py::arg("policy") = "wisdom",
           py::arg("theta") = kDefaultThreshold, py::arg("seed") = std::nullopt,
           py::arg("disturbance") = std::map<std::string, std::pair<double, double>>{},
           py::arg("initial") = std::map<std::string, double>{});

  m.def("_load_kb_text", [](const std::string &text) {
    return std::const_pointer_cast<KnowledgeBase>(loadText(text));
  });
  m.def("_validate_text", &validateText);
  m.def("possibility", [](const std::vector<double> &a, const std::vector<double> &b) {
    if (a.size() != b.size()) throw DimensionMismatch("sets of different length");
    auto u = std::make_shared<Universe>(Universe{"u", std::vector<double>(a.size()), ""});
    for (std::size_t i = 0; i < a.size(); ++i) u->points[i] = static_cast<double>(i);
    return possibility(FuzzySet(u, a), FuzzySet(u, b));
  });

  py::class_<Service>(m, "_Service")
      .def(py::init<std::optional<std::filesystem::path>>(), py::arg("log_dir") = std::nullopt)
      .def("load_kb_dir", &Service::loadKnowledgeBaseDirectory)
      .def("put_kb", [](Service &s, const std::string &text, std::optional<std::string> id) {
        return s.putKnowledgeBaseDocument(text, std::move(id));
      }, py::arg("text"), py::arg("id") = std::nullopt)
      .def("kb_ids", &Service::knowledgeBaseIds)
      .def("create_session",
           [](Service &s, const std::string &config) { return s.createSession(SessionConfig::fromJson(json::parse(config))); })
      .def("turn",
           [](Service &s, const std::string &session, const std::string &utterance) {
             return dumpJson(s.dialogTurn(session, utterance).toJson());
           },
           py::call_guard<py::gil_scoped_release>())
      .def("state", [](const Service &s, const std::string &session) { return dumpJson(s.getState(session)); })
      .def("explanation", [](const Service &s, const std::string &session, const std::string &did) {
        return dumpJson(s.explanation(session, did));
      })
      .def("configure", &Service::configureSession, py::arg("session"), py::arg("policy") = std::nullopt,
           py::arg("theta") = std::nullopt)
      .def("ticks",
           [](Service &s, const std::string &session, int steps) {
             std::vector<std::string> out;
             s.streamTicks(session, steps, [&out](const json &r) {
               out.push_back(dumpJson(r));
               return true;
             });
             return out;
           })
      .def("replay",
           [](Service &s, const std::filesystem::path &log) {
             const auto r = s.replayLog(log);
             return py::make_tuple(r.session, r.turns, r.mismatched_turns);
           })
      .def("restore", &Service::restoreSessions)
      .def("log_path", &Service::logPath);

  py::enum_<Policy>(m, "Policy").value("WISDOM", Policy::Wisdom).value("INTUITION", Policy::Intuition);
}
