// Command implementations behind the command-line tool: run a program
// deterministically, explore its schedules and choices, check its syntax,
// and regress the built-in corpus. Kept in the library so the integration
// suites drive the same code paths as the executable.
//
// Exit codes: 0 a value (or an explore verdict), 1 failure, 2 interpreter
// errors / fuel / deadlock, 3 syntax errors, 4 an any-failure query whose
// bounds were exhausted without a verdict.

#pragma once

#include <algorithm>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hitree/lang/corpus.hpp"
#include "hitree/lang/denote.hpp"
#include "hitree/lang/parse.hpp"

namespace hitree::cli {

struct RunConfig {
  std::uint64_t fuel = 1'000'000;
  std::uint64_t demonic_scan_cap = 65536;
};

enum class Query { any_failure, value_set, all_outcomes };

struct ExploreConfig {
  Bounds bounds{};
  std::uint64_t enum_locs = 16;
  Query query = Query::all_outcomes;
  bool json = false;
  std::string replay_file;  // when nonempty, verify the saved document instead
};

inline const char* to_string(Query q) {
  switch (q) {
    case Query::any_failure: return "any-failure";
    case Query::value_set: return "value-set";
    case Query::all_outcomes: return "all-outcomes";
  }
  return "?";
}

inline std::optional<Query> parse_query(const std::string& s) {
  if (s == "any-failure") return Query::any_failure;
  if (s == "value-set") return Query::value_set;
  if (s == "all-outcomes") return Query::all_outcomes;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Program resolution: corpus names take precedence over file paths.

struct Program {
  std::string name;
  std::string source;
};

inline std::optional<Program> load_program(const std::string& name_or_path, std::string& err) {
  if (const lang::CorpusEntry* e = lang::find_corpus(name_or_path))
    return Program{e->name, e->source};
  std::ifstream in(name_or_path);
  if (!in) {
    err = "no corpus entry or readable file named '" + name_or_path + "'";
    return std::nullopt;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return Program{name_or_path, ss.str()};
}

// ---------------------------------------------------------------------------
// Trace documents

inline nlohmann::json trace_json(const Trace& t) {
  nlohmann::json arr = nlohmann::json::array();
  for (const ChoiceRecord& r : t)
    arr.push_back({{"step", r.step}, {"effect", r.effect}, {"branch", r.branch}, {"note", r.note}});
  return arr;
}

inline Trace trace_from_json(const nlohmann::json& arr) {
  Trace t;
  for (const auto& r : arr)
    t.push_back({r.at("step").get<std::uint64_t>(), r.at("effect").get<std::string>(),
                 r.at("branch").get<std::size_t>(), r.value("note", std::string{})});
  return t;
}

inline nlohmann::json explore_document(const Program& prog, const ExploreConfig& cfg,
                                       const ExploreResult<lang::Value>& res) {
  nlohmann::json doc;
  doc["version"] = 1;
  doc["program"] = prog.name;
  doc["query"] = to_string(cfg.query);
  doc["bounds"] = {{"max_depth", cfg.bounds.max_depth},
                   {"max_branches", cfg.bounds.max_branches},
                   {"enum_locs", cfg.enum_locs}};
  doc["exhausted"] = res.exhausted;
  nlohmann::json outs = nlohmann::json::array();
  for (const auto& [o, t] : res.outcomes)
    outs.push_back({{"outcome", to_string(o.kind)}, {"display", describe(o)}, {"trace", trace_json(t)}});
  doc["outcomes"] = outs;
  return doc;
}

// ---------------------------------------------------------------------------
// Commands

inline int cmd_run(const std::string& name_or_path, const RunConfig& cfg, std::ostream& out) {
  std::string err;
  std::optional<Program> prog = load_program(name_or_path, err);
  if (!prog) {
    out << "error: " << err << "\n";
    return 3;
  }
  lang::ExprPtr e;
  try {
    e = lang::parse(prog->source);
  } catch (const lang::SyntaxError& se) {
    out << prog->name << ": " << se.what() << "\n";
    return 3;
  }
  Outcome<lang::Value> o = lang::run_eval(e, cfg.fuel, cfg.demonic_scan_cap);
  out << prog->name << ": " << describe(o) << "\n";
  switch (o.kind) {
    case OutcomeKind::value: return 0;
    case OutcomeKind::failure: return 1;
    default: return 2;
  }
}

inline int replay_document(const nlohmann::json& doc, const ExploreConfig& cfg,
                           std::ostream& out) {
  std::string name = doc.at("program").get<std::string>();
  std::string err;
  std::optional<Program> prog = load_program(name, err);
  if (!prog) {
    out << "error: " << err << "\n";
    return 3;
  }
  lang::ExprPtr e = lang::parse(prog->source);
  lang::VTree t = lang::denote(e);
  Bounds bounds{doc.at("bounds").at("max_depth").get<std::uint64_t>(),
                doc.at("bounds").at("max_branches").get<std::uint64_t>()};
  lang::ExploreOptions opt{.enum_locs = doc.at("bounds").at("enum_locs").get<std::uint64_t>()};
  auto handler = lang::explore_handler(opt);
  bool all_ok = true;
  for (const auto& rec : doc.at("outcomes")) {
    Trace trace = trace_from_json(rec.at("trace"));
    ReplayResult<lang::Value> rr =
        replay_trace(t, lang::fresh_state(t), handler, trace, bounds);
    std::string expected = rec.at("display").get<std::string>();
    bool ok = rr.error.empty() && rr.outcome && describe(*rr.outcome) == expected;
    all_ok = all_ok && ok;
    out << (ok ? "[replayed] " : "[MISMATCH] ") << expected;
    if (!rr.error.empty()) out << " — " << rr.error;
    else if (!ok && rr.outcome) out << " — got " << describe(*rr.outcome);
    out << "\n";
  }
  (void)cfg;
  return all_ok ? 0 : 2;
}

inline int cmd_explore(const std::string& name_or_path, const ExploreConfig& cfg,
                       std::ostream& out) {
  if (!cfg.replay_file.empty()) {
    std::ifstream in(cfg.replay_file);
    if (!in) {
      out << "error: cannot read trace file '" << cfg.replay_file << "'\n";
      return 3;
    }
    try {
      nlohmann::json doc = nlohmann::json::parse(in, nullptr, true, true);
      return replay_document(doc, cfg, out);
    } catch (const nlohmann::json::exception& je) {
      out << "error: malformed trace document: " << je.what() << "\n";
      return 3;
    }
  }

  std::string err;
  std::optional<Program> prog = load_program(name_or_path, err);
  if (!prog) {
    out << "error: " << err << "\n";
    return 3;
  }
  lang::ExprPtr e;
  try {
    e = lang::parse(prog->source);
  } catch (const lang::SyntaxError& se) {
    out << prog->name << ": " << se.what() << "\n";
    return 3;
  }

  ExploreResult<lang::Value> res;
  try {
    res = lang::run_explore(e, cfg.bounds, lang::ExploreOptions{.enum_locs = cfg.enum_locs});
  } catch (const MissingEnumerator& me) {
    out << "error: " << me.what() << "\n";
    return 2;
  }

  if (cfg.json) {
    out << explore_document(*prog, cfg, res).dump(2) << "\n";
  } else {
    out << prog->name << ": " << res.outcomes.size() << " outcome(s), exhausted="
        << (res.exhausted ? "true" : "false") << "\n";
  }

  switch (cfg.query) {
    case Query::any_failure: {
      auto hit = exists_outcome(res, [](const Outcome<lang::Value>& o) {
        return o.kind == OutcomeKind::failure;
      });
      if (hit) {
        if (!cfg.json) {
          out << "failure reachable; witness schedule:\n";
          for (const ChoiceRecord& r : hit->second)
            out << "  step " << r.step << ": " << r.effect << " -> branch " << r.branch
                << (r.note.empty() ? "" : " (" + r.note + ")") << "\n";
        }
        return 0;
      }
      if (res.exhausted) {
        out << "no verdict: bounds exhausted before the search closed\n";
        return 4;
      }
      out << "no failing execution reachable\n";
      return 0;
    }
    case Query::value_set: {
      std::set<std::string> values;
      for (const auto& [o, t] : res.outcomes)
        if (o.kind == OutcomeKind::value) values.insert(lang::display(*o.result));
      if (!cfg.json) {
        out << "value set: {";
        bool first = true;
        for (const std::string& v : values) {
          out << (first ? "" : ", ") << v;
          first = false;
        }
        out << "}\n";
      }
      return 0;
    }
    case Query::all_outcomes: {
      if (!cfg.json) {
        for (const auto& [o, t] : res.outcomes)
          out << "  " << describe(o) << "  (trace length " << t.size() << ")\n";
      }
      return 0;
    }
  }
  return 0;
}

inline int cmd_check(const std::string& name_or_path, std::ostream& out) {
  std::string err;
  std::optional<Program> prog = load_program(name_or_path, err);
  if (!prog) {
    out << "error: " << err << "\n";
    return 3;
  }
  try {
    lang::ExprPtr e = lang::parse(prog->source);
    out << lang::ast_string(e) << "\n";
    return 0;
  } catch (const lang::SyntaxError& se) {
    out << prog->name << ": " << se.what() << "\n";
    return 3;
  }
}

/// Runs both interpreters over every corpus program and compares against the
/// committed expectations: the evaluator's outcome, the agreement of the
/// schedule-and-chooser-restricted exploration with the evaluator, and where
/// recorded the complete value set and failure reachability.
inline int cmd_corpus(const RunConfig& cfg, std::ostream& out) {
  bool all_ok = true;
  for (const lang::CorpusEntry& entry : lang::corpus()) {
    std::string problems;
    lang::ExprPtr e;
    try {
      e = lang::parse(entry.source);
    } catch (const lang::SyntaxError& se) {
      out << "[MISMATCH] " << entry.name << ": " << se.what() << "\n";
      all_ok = false;
      continue;
    }

    Outcome<lang::Value> evo = lang::run_eval(e, cfg.fuel, cfg.demonic_scan_cap);
    if (evo.kind != entry.eval_kind) problems += " eval-kind=" + std::string(to_string(evo.kind));
    if (entry.eval_int) {
      const std::int64_t* z = evo.result ? evo.result->as_int() : nullptr;
      if (!z || *z != *entry.eval_int) problems += " eval-value=" + describe(evo);
    }

    lang::VTree t = lang::denote(e);
    ExploreResult<lang::Value> restricted =
        explore(t, lang::fresh_state(t),
                lang::explore_handler(lang::ExploreOptions{.restrict_to_eval = true}),
                Bounds{});
    if (restricted.outcomes.size() != 1 || !(restricted.outcomes[0].first == evo))
      problems += " restricted-explore-diverges-from-eval";

    if (entry.explore_int_set || entry.explore_any_failure) {
      ExploreResult<lang::Value> full = lang::run_explore(e, Bounds{}, lang::ExploreOptions{});
      if (full.exhausted) problems += " explore-exhausted";
      if (entry.explore_int_set) {
        std::set<std::int64_t> got, want(entry.explore_int_set->begin(),
                                         entry.explore_int_set->end());
        for (const auto& [o, tr] : full.outcomes)
          if (o.kind == OutcomeKind::value)
            if (const std::int64_t* z = o.result->as_int()) got.insert(*z);
        if (got != want) problems += " explore-value-set";
      }
      if (entry.explore_any_failure) {
        bool found = exists_outcome(full, [](const Outcome<lang::Value>& o) {
                       return o.kind == OutcomeKind::failure;
                     }).has_value();
        if (found != *entry.explore_any_failure) problems += " explore-any-failure";
      }
    }

    if (problems.empty()) {
      out << "[ok] " << entry.name << ": " << describe(evo) << "\n";
    } else {
      out << "[MISMATCH] " << entry.name << ":" << problems << "\n";
      all_ok = false;
    }
  }
  return all_ok ? 0 : 1;
}

}  // namespace hitree::cli
