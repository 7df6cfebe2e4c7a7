#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "blo/bench.hpp"

namespace blo {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double to_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
    throw ConfigError(key, fmt::format("expected a finite number, got '{}'", text));
  }
  return v;
}

std::uint64_t to_u64(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError(key, fmt::format("expected a non-negative integer, got '{}'", text));
  }
  return v;
}

std::size_t to_size(const std::string& key, const std::string& text) {
  return static_cast<std::size_t>(to_u64(key, text));
}

bool to_bool(const std::string& key, const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  throw ConfigError(key, fmt::format("expected true or false, got '{}'", text));
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  if (out.empty()) throw ConfigError(key, "empty list");
  return out;
}

std::string fmt_list(const std::vector<double>& v) { return fmt::format("{}", fmt::join(v, ",")); }

std::string_view hvp_name(HvpPolicy::Mode m) {
  switch (m) {
    case HvpPolicy::Mode::analytic: return "analytic";
    case HvpPolicy::Mode::finite_difference: return "finite-difference";
    case HvpPolicy::Mode::automatic: return "automatic";
  }
  return "automatic";
}

HvpPolicy::Mode parse_hvp(const std::string& key, const std::string& text) {
  if (text == "analytic") return HvpPolicy::Mode::analytic;
  if (text == "finite-difference") return HvpPolicy::Mode::finite_difference;
  if (text == "automatic") return HvpPolicy::Mode::automatic;
  throw ConfigError(key, fmt::format("unknown hvp mode '{}'", text));
}

SolverConfig defaults_for(const std::string& problem) {
  if (problem == "nonconvex-sine") return SolverConfig::nonconvex_defaults();
  if (problem == "convex-quadratic") return SolverConfig::convex_defaults();
  if (problem == "hyperclean") return SolverConfig::hyperclean_defaults();
  throw ConfigError("problem.name", fmt::format("unknown problem '{}'", problem));
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string&)>;
using Getter = std::function<std::string(const ExperimentConfig&)>;

struct Field {
  Setter set;
  Getter get;
};

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> m;
    auto num = [](double v) { return fmt::format("{}", v); };

    m["problem.name"] = {[](ExperimentConfig&, const std::string&, const std::string&) {},
                         [](const ExperimentConfig& c) { return c.problem; }};
    m["problem.n"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                        c.problem_n = to_size(k, v);
                        if (c.problem_n == 0) throw ConfigError(k, "must be positive");
                      },
                      [](const ExperimentConfig& c) { return std::to_string(c.problem_n); }};
    m["problem.n_train"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                              c.hyperclean.n_train = to_size(k, v);
                            },
                            [](const ExperimentConfig& c) { return std::to_string(c.hyperclean.n_train); }};
    m["problem.n_val"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                            c.hyperclean.n_val = to_size(k, v);
                          },
                          [](const ExperimentConfig& c) { return std::to_string(c.hyperclean.n_val); }};
    m["problem.features"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                               c.hyperclean.n_features = to_size(k, v);
                             },
                             [](const ExperimentConfig& c) { return std::to_string(c.hyperclean.n_features); }};
    m["problem.classes"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                              c.hyperclean.n_classes = to_size(k, v);
                            },
                            [](const ExperimentConfig& c) { return std::to_string(c.hyperclean.n_classes); }};
    m["problem.hidden"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                             c.hyperclean.n_hidden = to_size(k, v);
                           },
                           [](const ExperimentConfig& c) { return std::to_string(c.hyperclean.n_hidden); }};
    m["problem.corrupt_fraction"] = {
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.hyperclean.corrupt_fraction = to_double(k, v);
        },
        [num](const ExperimentConfig& c) { return num(c.hyperclean.corrupt_fraction); }};
    m["problem.data_seed"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                                c.hyperclean.seed = to_u64(k, v);
                              },
                              [](const ExperimentConfig& c) { return std::to_string(c.hyperclean.seed); }};
    m["problem.lq_weight"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                                c.hyperclean.lq_weight = to_double(k, v);
                              },
                              [num](const ExperimentConfig& c) { return num(c.hyperclean.lq_weight); }};
    m["problem.lq_q"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                           c.hyperclean.lq_q = to_double(k, v);
                         },
                         [num](const ExperimentConfig& c) { return num(c.hyperclean.lq_q); }};
    m["problem.separation"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                                 c.hyperclean.class_separation = to_double(k, v);
                               },
                               [num](const ExperimentConfig& c) { return num(c.hyperclean.class_separation); }};

    m["solver.method"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                            try {
                              c.solver.method = parse_method(v);
                            } catch (const InvalidArgument& e) {
                              throw ConfigError(k, e.what());
                            }
                          },
                          [](const ExperimentConfig& c) { return std::string(to_string(c.solver.method)); }};
    m["solver.T"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                       c.solver.T = to_size(k, v);
                     },
                     [](const ExperimentConfig& c) { return std::to_string(c.solver.T); }};
    m["solver.K"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                       c.solver.K = to_size(k, v);
                     },
                     [](const ExperimentConfig& c) { return std::to_string(c.solver.K); }};
    m["solver.alpha_y"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                             try {
                               const auto list = to_list(k, v);
                               c.solver.inner_schedule = list.size() == 1
                                                             ? StepSchedule::constant(list[0])
                                                             : StepSchedule::per_step(list);
                             } catch (const ConfigError&) {
                               throw;
                             } catch (const InvalidArgument& e) {
                               throw ConfigError(k, e.what());
                             }
                           },
                           [](const ExperimentConfig& c) { return fmt_list(c.solver.inner_schedule.values()); }};
    m["solver.alpha_x"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                             c.solver.alpha_x = to_double(k, v);
                           },
                           [num](const ExperimentConfig& c) { return num(c.solver.alpha_x); }};
    m["solver.alpha_z"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                             c.solver.alpha_z = to_double(k, v);
                           },
                           [num](const ExperimentConfig& c) { return num(c.solver.alpha_z); }};
    m["solver.truncate_at"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                                 if (v == "none") {
                                   c.solver.truncate_at.reset();
                                 } else {
                                   c.solver.truncate_at = to_size(k, v);
                                 }
                               },
                               [](const ExperimentConfig& c) {
                                 return c.solver.truncate_at ? std::to_string(*c.solver.truncate_at)
                                                             : std::string("none");
                               }};
    m["solver.mu"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                        c.solver.mu = to_double(k, v);
                      },
                      [num](const ExperimentConfig& c) { return num(c.solver.mu); }};
    m["solver.outer_optimizer"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                                     try {
                                       c.solver.outer_optimizer = parse_outer_optimizer(v);
                                     } catch (const InvalidArgument& e) {
                                       throw ConfigError(k, e.what());
                                     }
                                   },
                                   [](const ExperimentConfig& c) {
                                     return std::string(to_string(c.solver.outer_optimizer));
                                   }};
    m["solver.seed"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                          c.solver.seed = to_u64(k, v);
                        },
                        [](const ExperimentConfig& c) { return std::to_string(c.solver.seed); }};
    m["solver.nesterov_alpha"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                                    if (v == "none") {
                                      c.solver.nesterov_alpha.reset();
                                    } else {
                                      c.solver.nesterov_alpha = to_double(k, v);
                                    }
                                  },
                                  [num](const ExperimentConfig& c) {
                                    return c.solver.nesterov_alpha ? num(*c.solver.nesterov_alpha)
                                                                   : std::string("none");
                                  }};
    m["solver.paper_t_rule"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                                  c.solver.paper_t_rule = to_bool(k, v);
                                },
                                [](const ExperimentConfig& c) {
                                  return std::string(c.solver.paper_t_rule ? "true" : "false");
                                }};
    m["solver.implicit_iterations"] = {
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.solver.implicit_iterations = to_size(k, v);
        },
        [](const ExperimentConfig& c) { return std::to_string(c.solver.implicit_iterations); }};
    m["solver.hvp"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                         c.solver.hvp.mode = parse_hvp(k, v);
                       },
                       [](const ExperimentConfig& c) { return std::string(hvp_name(c.solver.hvp.mode)); }};
    m["solver.fd_step"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                             c.solver.hvp.fd_step = to_double(k, v);
                             if (!(c.solver.hvp.fd_step > 0.0)) throw ConfigError(k, "must be positive");
                           },
                           [num](const ExperimentConfig& c) { return num(c.solver.hvp.fd_step); }};
    m["solver.timing"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                            c.solver.record_timing = to_bool(k, v);
                          },
                          [](const ExperimentConfig& c) {
                            return std::string(c.solver.record_timing ? "true" : "false");
                          }};

    m["init.x0"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                      if (v == "random") {
                        c.x0.reset();
                      } else {
                        c.x0 = to_list(k, v);
                      }
                    },
                    [](const ExperimentConfig& c) { return c.x0 ? fmt_list(*c.x0) : std::string("random"); }};
    m["init.z0"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                      if (v == "random") {
                        c.z0.reset();
                      } else {
                        c.z0 = to_list(k, v);
                      }
                    },
                    [](const ExperimentConfig& c) { return c.z0 ? fmt_list(*c.z0) : std::string("random"); }};
    m["init.seed"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                        c.init_seed = to_u64(k, v);
                      },
                      [](const ExperimentConfig& c) { return std::to_string(c.init_seed); }};
    m["init.lo"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                      c.init_lo = to_double(k, v);
                    },
                    [num](const ExperimentConfig& c) { return num(c.init_lo); }};
    m["init.hi"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                      c.init_hi = to_double(k, v);
                    },
                    [num](const ExperimentConfig& c) { return num(c.init_hi); }};

    m["run.repetitions"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                              c.repetitions = to_size(k, v);
                              if (c.repetitions == 0) throw ConfigError(k, "must be at least 1");
                            },
                            [](const ExperimentConfig& c) { return std::to_string(c.repetitions); }};
    m["run.output"] = {[](ExperimentConfig& c, const std::string&, const std::string& v) { c.output = v; },
                       [](const ExperimentConfig& c) { return c.output; }};
    m["run.parallelism"] = {[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                              c.parallelism = to_size(k, v);
                              if (c.parallelism == 0) throw ConfigError(k, "must be at least 1");
                            },
                            [](const ExperimentConfig& c) { return std::to_string(c.parallelism); }};
    return m;
  }();
  return table;
}

}  // namespace

ConfigEntries parse_config_entries(const std::string& text) {
  ConfigEntries entries;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(body, fmt::format("line {}: expected 'key = value'", number));
    }
    std::string key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw ConfigError("", fmt::format("line {}: missing key", number));
    entries.emplace_back(std::move(key), std::move(value));
  }
  return entries;
}

ExperimentConfig config_from_entries(const ConfigEntries& entries) {
  const auto& table = fields();
  ExperimentConfig config;
  // The problem picks the solver defaults, so it is resolved first.
  for (const auto& [key, value] : entries) {
    if (key == "problem.name") config.problem = value;
  }
  config.solver = defaults_for(config.problem);
  for (const auto& [key, value] : entries) {
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError(key, "unknown key");
    it->second.set(config, key, value);
  }
  try {
    config.solver.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("solver", e.what());
  }
  if (!(config.init_lo < config.init_hi)) throw ConfigError("init.lo", "must be below init.hi");
  return config;
}

ExperimentConfig parse_config(const std::string& text) {
  return config_from_entries(parse_config_entries(text));
}

std::string emit_config(const ExperimentConfig& config) {
  std::string out;
  for (const auto& [key, field] : fields()) {
    out += fmt::format("{} = {}\n", key, field.get(config));
  }
  return out;
}

}  // namespace blo
