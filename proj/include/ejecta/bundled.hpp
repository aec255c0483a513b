#pragma once

// The bundled example problems, embedded so `reproduce` needs no files.
// problems/<id>.toml holds identical copies.

#include <string>
#include <string_view>
#include <vector>

#include "ejecta/errors.hpp"
#include "ejecta/problem.hpp"

namespace ejecta::bundled {

struct Entry {
  std::string_view id;
  std::string_view text;
};

inline const std::vector<Entry>& entries() {
  static const std::vector<Entry> all{
      {"exNTse", R"toml([problem]
dim = 1
period = "2pi"
g = "(x + x^2) / (1 + x^2)"
f = "sin(t)"
separated = false

[window]
lambda = [-0.3, 0.3]
p = [-2.0, 1.0]

[numerics]
rk_tol = 1e-10
grid = 400
resonance_eps = 1e-8
)toml"},
      {"exsimp", R"toml([problem]
dim = 1
period = "2pi"
g = "x / (1 + x^2)"
f = "1 + cos(x + t)"
separated = false

[window]
lambda = [-0.3, 0.3]
p = [-2.0, 2.0]

[numerics]
rk_tol = 1e-10
grid = 400
resonance_eps = 1e-8
)toml"},
      {"extang", R"toml([problem]
dim = 1
period = "2pi"
g = "x^3 / (1 + x^2)"
f = "1 + sin(t)"
separated = false

[window]
lambda = [-0.1, 0.1]
p = [-1.0, 1.0]

[numerics]
rk_tol = 1e-10
grid = 400
resonance_eps = 1e-8
)toml"},
      {"exnasty", R"toml([problem]
dim = 1
period = "2pi"
g = "(x^3 + x^2) / (1 + x^2)"
f = "sin(t + x)"
separated = false

[window]
lambda = [-0.5, 0.5]
p = [-2.0, 1.0]

[numerics]
rk_tol = 1e-10
grid = 400
resonance_eps = 1e-8
)toml"},
      {"ex2tang", R"toml([problem]
dim = 1
period = "2pi"
g = "x^3 * (1 + x)^2 * (x - 1)^2 / (1 + x^6)"
f = "sin(t) + 1"
separated = true

[window]
lambda = [-0.1, 0.1]
p = [-2.0, 2.0]

[numerics]
rk_tol = 1e-10
grid = 400
resonance_eps = 1e-8
)toml"},
      {"remnoso-agree", R"toml([problem]
dim = 1
period = "2pi"
g = "(x^3 + x^2) / (1 + x^2)"
f = "sin(t) + 1"
separated = true

[window]
lambda = [0.0, 0.05]
p = [-0.5, 0.5]

[numerics]
rk_tol = 1e-10
grid = 400
resonance_eps = 1e-8
)toml"},
      {"remnoso-disagree", R"toml([problem]
dim = 1
period = "2pi"
g = "(x^3 + x^2) / (1 + x^2)"
f = "sin(t) - 1"
separated = true

[window]
lambda = [0.0, 0.05]
p = [-0.5, 0.5]

[numerics]
rk_tol = 1e-10
grid = 400
resonance_eps = 1e-8
)toml"},
      {"ex3d", R"toml([problem]
dim = 2
period = "2pi"
g = ["x^3", "y + x^2"]
f = ["sin(t) + 1", "sin(t) + 1"]
separated = false

[window]
lambda = [-0.2, 0.2]
x = [-1.0, 1.0]
y = [-1.0, 1.0]

[numerics]
rk_tol = 1e-10
grid = 16
resonance_eps = 1e-8
)toml"},
  };
  return all;
}

inline std::vector<std::string> ids() {
  std::vector<std::string> out;
  for (const auto& e : entries()) out.emplace_back(e.id);
  return out;
}

inline const Entry* find(std::string_view id) {
  for (const auto& e : entries())
    if (e.id == id) return &e;
  return nullptr;
}

inline ProblemSpec load(std::string_view id) {
  const Entry* e = find(id);
  if (!e) throw InputError("unknown example id '" + std::string(id) + "'");
  return parse_problem(e->text, std::string(id));
}

}  // namespace ejecta::bundled
