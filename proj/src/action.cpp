#include "warpcone/action.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "warpcone/errors.hpp"

namespace warpcone {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_unit(double x) {
  double r = x - std::floor(x);
  if (r >= 1.0) r -= 1.0;
  return r;
}

double wrap_angle(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0) r += kTwoPi;
  if (r >= kTwoPi) r -= kTwoPi;
  return r;
}

std::size_t letter_generator(int letter) { return static_cast<std::size_t>(std::abs(letter) - 1); }

}  // namespace

// Word -----------------------------------------------------------------------

Word::Word(std::vector<int> letters) {
  letters_.reserve(letters.size());
  for (int l : letters) {
    if (l == 0) throw DomainError("word letter 0 is not a generator");
    if (!letters_.empty() && letters_.back() == -l) {
      letters_.pop_back();
    } else {
      letters_.push_back(l);
    }
  }
}

Word Word::generator(std::size_t g, bool inverse) {
  const int l = static_cast<int>(g + 1);
  return Word({inverse ? -l : l});
}

Word Word::parse(const std::string& text) {
  if (text.empty() || text == "e") return Word();
  std::vector<int> letters;
  for (char ch : text) {
    if (ch >= 'a' && ch <= 'z') {
      letters.push_back(ch - 'a' + 1);
    } else if (ch >= 'A' && ch <= 'Z') {
      letters.push_back(-(ch - 'A' + 1));
    } else {
      throw DomainError(std::string("bad word letter '") + ch + "'");
    }
  }
  return Word(std::move(letters));
}

Word Word::inverse() const {
  std::vector<int> out(letters_.rbegin(), letters_.rend());
  for (int& l : out) l = -l;
  Word w;
  w.letters_ = std::move(out);
  return w;
}

Word Word::operator*(const Word& rhs) const {
  std::vector<int> all = letters_;
  all.insert(all.end(), rhs.letters_.begin(), rhs.letters_.end());
  return Word(std::move(all));
}

std::string Word::to_string() const {
  if (letters_.empty()) return "e";
  std::string out;
  for (int l : letters_) {
    const std::size_t g = letter_generator(l);
    if (g < 26) {
      out.push_back(static_cast<char>((l > 0 ? 'a' : 'A') + g));
    } else {
      out += (l > 0 ? "[g" : "[G") + std::to_string(g) + "]";
    }
  }
  return out;
}

int letter_rank(int letter) {
  const int g = std::abs(letter) - 1;
  return 2 * g + (letter < 0 ? 1 : 0);
}

bool shortlex_less(const Word& a, const Word& b) {
  if (a.length() != b.length()) return a.length() < b.length();
  const auto& la = a.letters();
  const auto& lb = b.letters();
  for (std::size_t i = 0; i < la.size(); ++i) {
    if (la[i] != lb[i]) return letter_rank(la[i]) < letter_rank(lb[i]);
  }
  return false;
}

// GroupModel -------------------------------------------------------------------

std::string GroupModel::to_string() const {
  switch (kind) {
    case GroupKind::trivial: return "trivial";
    case GroupKind::integers: return "Z";
    case GroupKind::integers2: return "Z2";
    case GroupKind::cyclic: return "Z/" + std::to_string(order);
    case GroupKind::free: return "free";
    case GroupKind::unknown: return "unknown";
  }
  return "unknown";
}

GroupModel GroupModel::parse(const std::string& text) {
  if (text == "trivial") return {GroupKind::trivial, 1};
  if (text == "Z") return {GroupKind::integers, 0};
  if (text == "Z2") return {GroupKind::integers2, 0};
  if (text == "free") return {GroupKind::free, 0};
  if (text == "unknown") return {GroupKind::unknown, 0};
  if (text.rfind("Z/", 0) == 0) {
    const auto order = static_cast<std::size_t>(std::stoul(text.substr(2)));
    if (order == 0) throw DomainError("cyclic group order must be positive");
    return {GroupKind::cyclic, order};
  }
  throw DomainError("unknown group model '" + text + "'");
}

// GroupAction ------------------------------------------------------------------

namespace {

void check_generator(const SpaceSpec& space, const Generator& gen) {
  const auto fail = [&](const std::string& why) {
    throw DomainError("generator '" + gen.name + "': " + why);
  };
  std::visit(
      [&](const auto& g) {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, CircleRotation>) {
          if (space.kind != SpaceKind::circle) fail("rotation needs a circle");
          if (!std::isfinite(g.angle)) fail("non-finite angle");
        } else if constexpr (std::is_same_v<T, SphereLinear>) {
          if (space.kind != SpaceKind::sphere2) fail("3x3 matrix needs a sphere");
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
              double dot = 0.0;
              for (int k = 0; k < 3; ++k) dot += g.m[k][i] * g.m[k][j];
              if (std::fabs(dot - (i == j ? 1.0 : 0.0)) > 1e-12) fail("matrix is not orthogonal");
            }
          if (g.numerators) {
            for (int i = 0; i < 3; ++i)
              for (int j = 0; j < 3; ++j) {
                const double v = static_cast<double>((*g.numerators)[i][j]) / static_cast<double>(g.denominator);
                if (std::fabs(v - g.m[i][j]) > 1e-12) fail("exact numerators disagree with matrix");
              }
          }
        } else if constexpr (std::is_same_v<T, TorusLinear>) {
          if (space.kind != SpaceKind::torus2) fail("2x2 integer matrix needs a torus");
          const auto det = g.a * g.d - g.b * g.c;
          if (det != 1 && det != -1) fail("matrix is not unimodular");
        } else if constexpr (std::is_same_v<T, TorusTranslation>) {
          if (space.kind != SpaceKind::torus2) fail("translation needs a torus");
          if (!std::isfinite(g.dx) || !std::isfinite(g.dy)) fail("non-finite translation");
        } else if constexpr (std::is_same_v<T, Permutation>) {
          if (space.kind != SpaceKind::finite_set) fail("permutation needs a finite set");
          if (g.image.size() != space.points) fail("permutation size does not match the set");
          std::vector<bool> hit(g.image.size(), false);
          for (auto v : g.image) {
            if (v >= hit.size() || hit[v]) fail("not a bijection");
            hit[v] = true;
          }
        }
      },
      gen.map);
}

// Numerical equality of the maps (g, inv_g) and (h, inv_h).
bool same_map(const GeneratorMap& a, bool ainv, const GeneratorMap& b, bool binv) {
  if (a.index() != b.index()) return false;
  return std::visit(
      [&](const auto& ga) -> bool {
        using T = std::decay_t<decltype(ga)>;
        const auto& gb = std::get<T>(b);
        if constexpr (std::is_same_v<T, CircleRotation>) {
          const double x = wrap_angle(ainv ? -ga.angle : ga.angle);
          const double y = wrap_angle(binv ? -gb.angle : gb.angle);
          const double d = std::fabs(x - y);
          return std::min(d, kTwoPi - d) <= 1e-12;
        } else if constexpr (std::is_same_v<T, SphereLinear>) {
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
              const double x = ainv ? ga.m[j][i] : ga.m[i][j];
              const double y = binv ? gb.m[j][i] : gb.m[i][j];
              if (std::fabs(x - y) > 1e-12) return false;
            }
          return true;
        } else if constexpr (std::is_same_v<T, TorusLinear>) {
          auto inv = [](const TorusLinear& m) {
            const auto det = m.a * m.d - m.b * m.c;
            return TorusLinear{det * m.d, -det * m.b, -det * m.c, det * m.a};
          };
          const TorusLinear x = ainv ? inv(ga) : ga;
          const TorusLinear y = binv ? inv(gb) : gb;
          return x.a == y.a && x.b == y.b && x.c == y.c && x.d == y.d;
        } else if constexpr (std::is_same_v<T, TorusTranslation>) {
          const double sx = ainv ? -1.0 : 1.0, sy = binv ? -1.0 : 1.0;
          auto gap = [](double u, double v) {
            const double d = std::fabs(wrap_unit(u) - wrap_unit(v));
            return std::min(d, 1.0 - d);
          };
          return gap(sx * ga.dx, sy * gb.dx) <= 1e-12 && gap(sx * ga.dy, sy * gb.dy) <= 1e-12;
        } else {
          auto image = [](const Permutation& p, bool inv) {
            if (!inv) return p.image;
            std::vector<std::size_t> out(p.image.size());
            for (std::size_t i = 0; i < p.image.size(); ++i) out[p.image[i]] = i;
            return out;
          };
          return image(ga, ainv) == image(gb, binv);
        }
      },
      a);
}

double torus_norm(const TorusLinear& m) {
  const double a = static_cast<double>(m.a), b = static_cast<double>(m.b);
  const double c = static_cast<double>(m.c), d = static_cast<double>(m.d);
  const double s = a * a + b * b + c * c + d * d;
  const double det = a * d - b * c;
  const double disc = std::sqrt(std::max(0.0, s * s - 4.0 * det * det));
  return std::sqrt((s + disc) / 2.0);
}

}  // namespace

GroupAction::GroupAction(SpaceSpec space, std::vector<Generator> generators, GroupModel group, bool symmetric)
    : space_(space), generators_(std::move(generators)), group_(group) {
  for (const auto& g : generators_) check_generator(space_, g);

  for (std::size_t g = 0; g < generators_.size(); ++g) moves_.push_back({g, false});
  if (symmetric) {
    for (std::size_t g = 0; g < generators_.size(); ++g) {
      bool present = false;
      for (const auto& mv : moves_) {
        if (same_map(generators_[g].map, true, generators_[mv.generator].map, mv.inverse)) {
          present = true;
          break;
        }
      }
      if (!present) moves_.push_back({g, true});
    }
  } else {
    for (std::size_t g = 0; g < generators_.size(); ++g) {
      bool present = false;
      for (std::size_t h = 0; h < generators_.size(); ++h) {
        if (same_map(generators_[g].map, true, generators_[h].map, false)) present = true;
      }
      if (!present) {
        throw DomainError("generating set declared symmetric-free but inverse of '" + generators_[g].name +
                          "' is missing");
      }
    }
  }

  lipschitz_.resize(generators_.size());
  for (std::size_t g = 0; g < generators_.size(); ++g) {
    lipschitz_[g] = {lipschitz_estimate(*this, g, false), lipschitz_estimate(*this, g, true)};
  }
}

double GroupAction::lipschitz(std::size_t g, bool inverse) const {
  if (g >= lipschitz_.size()) throw DomainError("generator index out of range");
  return lipschitz_[g][inverse ? 1 : 0];
}

double GroupAction::max_lipschitz() const {
  double c = 1.0;
  for (const auto& l : lipschitz_) c = std::max({c, l[0], l[1]});
  return c;
}

Point GroupAction::apply_letter(int letter, const Point& p) const {
  const std::size_t g = letter_generator(letter);
  if (g >= generators_.size()) throw DomainError("word letter refers to a missing generator");
  const bool inv = letter < 0;
  Point q = p;
  std::visit(
      [&](const auto& gen) {
        using T = std::decay_t<decltype(gen)>;
        if constexpr (std::is_same_v<T, CircleRotation>) {
          q[0] = wrap_angle(p[0] + (inv ? -gen.angle : gen.angle));
        } else if constexpr (std::is_same_v<T, SphereLinear>) {
          for (int i = 0; i < 3; ++i) {
            double s = 0.0;
            for (int j = 0; j < 3; ++j) s += (inv ? gen.m[j][i] : gen.m[i][j]) * p[j];
            q[i] = s;
          }
        } else if constexpr (std::is_same_v<T, TorusLinear>) {
          const auto det = gen.a * gen.d - gen.b * gen.c;
          const TorusLinear m = inv ? TorusLinear{det * gen.d, -det * gen.b, -det * gen.c, det * gen.a} : gen;
          q[0] = wrap_unit(static_cast<double>(m.a) * p[0] + static_cast<double>(m.b) * p[1]);
          q[1] = wrap_unit(static_cast<double>(m.c) * p[0] + static_cast<double>(m.d) * p[1]);
        } else if constexpr (std::is_same_v<T, TorusTranslation>) {
          q[0] = wrap_unit(p[0] + (inv ? -gen.dx : gen.dx));
          q[1] = wrap_unit(p[1] + (inv ? -gen.dy : gen.dy));
        } else {
          const auto idx = static_cast<std::size_t>(p[0]);
          if (!inv) {
            q[0] = static_cast<double>(gen.image[idx]);
          } else {
            const auto it = std::find(gen.image.begin(), gen.image.end(), idx);
            q[0] = static_cast<double>(it - gen.image.begin());
          }
        }
      },
      generators_[g].map);
  return q;
}

Point apply(const GroupAction& action, const Word& w, const Point& p) {
  validate_point(action.space(), p);
  Point q = p;
  const auto& letters = w.letters();
  for (auto it = letters.rbegin(); it != letters.rend(); ++it) q = action.apply_letter(*it, q);
  return q;
}

std::vector<Word> enumerate_sphere(std::size_t generator_count, std::size_t length) {
  std::vector<Word> layer{Word()};
  for (std::size_t k = 0; k < length; ++k) {
    std::vector<Word> next;
    for (const auto& w : layer) {
      for (std::size_t g = 0; g < generator_count; ++g) {
        for (int sign : {1, -1}) {
          const int l = sign * static_cast<int>(g + 1);
          if (!w.letters().empty() && w.letters().back() == -l) continue;
          std::vector<int> letters = w.letters();
          letters.push_back(l);
          next.emplace_back(std::move(letters));
        }
      }
    }
    layer = std::move(next);
  }
  return layer;
}

std::vector<Word> enumerate_ball(const GroupAction& action, std::size_t L, BallOptions options) {
  const std::size_t m = action.generator_count();
  // Free-group ball size 1 + sum 2m (2m-1)^(k-1), checked before allocating.
  double total = 1.0, layer = m == 0 ? 0.0 : 2.0 * static_cast<double>(m);
  for (std::size_t k = 1; k <= L; ++k) {
    total += layer;
    layer *= 2.0 * static_cast<double>(m) - 1.0;
    if (total > static_cast<double>(options.max_words)) {
      throw ResourceError("max_words=" + std::to_string(options.max_words),
                          "word ball of radius " + std::to_string(L) + " is too large");
    }
  }
  std::vector<Word> out{Word()};
  std::vector<Word> current{Word()};
  for (std::size_t k = 1; k <= L && m > 0; ++k) {
    std::vector<Word> next;
    for (const auto& w : current) {
      for (std::size_t g = 0; g < m; ++g) {
        for (int sign : {1, -1}) {
          const int l = sign * static_cast<int>(g + 1);
          if (!w.letters().empty() && w.letters().back() == -l) continue;
          std::vector<int> letters = w.letters();
          letters.push_back(l);
          next.emplace_back(std::move(letters));
        }
      }
    }
    out.insert(out.end(), next.begin(), next.end());
    current = std::move(next);
  }
  return out;
}

double lipschitz_estimate(const GroupAction& action, std::size_t generator, bool inverse) {
  if (generator >= action.generator_count()) throw DomainError("generator index out of range");
  const auto& map = action.generators()[generator].map;
  if (const auto* m = std::get_if<TorusLinear>(&map)) {
    // The inverse of a unimodular matrix has the same singular values.
    (void)inverse;
    return torus_norm(*m);
  }
  return 1.0;
}

bool ExactMatrix3::is_identity() const {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (num[i][j] != (i == j ? den : 0)) return false;
  return true;
}

std::optional<ExactMatrix3> exact_word_matrix(const GroupAction& action, const Word& w) {
  ExactMatrix3 acc;
  for (int i = 0; i < 3; ++i) acc.num[i][i] = 1;
  for (int l : w.letters()) {
    const std::size_t g = letter_generator(l);
    if (g >= action.generator_count()) throw DomainError("word letter refers to a missing generator");
    const auto* s = std::get_if<SphereLinear>(&action.generators()[g].map);
    if (s == nullptr || !s->numerators) return std::nullopt;
    std::array<std::array<std::int64_t, 3>, 3> gen{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) gen[i][j] = l > 0 ? (*s->numerators)[i][j] : (*s->numerators)[j][i];
    ExactMatrix3 next;
    const __int128 den = static_cast<__int128>(acc.den) * s->denominator;
    if (den > INT64_MAX) throw DomainError("word too long for exact int64 arithmetic");
    next.den = static_cast<std::int64_t>(den);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        __int128 sum = 0;
        for (int k = 0; k < 3; ++k) sum += static_cast<__int128>(acc.num[i][k]) * gen[k][j];
        if (sum > INT64_MAX || sum < INT64_MIN) throw DomainError("word too long for exact int64 arithmetic");
        next.num[i][j] = static_cast<std::int64_t>(sum);
      }
    acc = next;
  }
  return acc;
}

// Canned actions -------------------------------------------------------------

GroupAction trivial_action(const SpaceSpec& space) {
  return GroupAction(space, {}, GroupModel{GroupKind::trivial, 1});
}

GroupAction cyclic_shift(std::size_t n, std::size_t step) {
  Permutation p;
  p.image.resize(n);
  for (std::size_t i = 0; i < n; ++i) p.image[i] = (i + step) % n;
  const std::size_t order = n / std::gcd(n, step % n == 0 ? n : step % n);
  return GroupAction(SpaceSpec::finite_set(n), {Generator{"a", p}}, GroupModel{GroupKind::cyclic, order});
}

GroupAction circle_rotation(double turns, GroupModel group) {
  return GroupAction(SpaceSpec::circle(), {Generator{"a", CircleRotation{kTwoPi * turns}}}, group);
}

GroupAction irrational_rotation() {
  return circle_rotation(std::sqrt(2.0) - 1.0, GroupModel{GroupKind::integers, 0});
}

GroupAction cat_map() {
  return GroupAction(SpaceSpec::torus2(), {Generator{"a", TorusLinear{2, 1, 1, 1}}},
                     GroupModel{GroupKind::integers, 0});
}

GroupAction free_so3() {
  SphereLinear rx;
  rx.numerators = std::array<std::array<std::int64_t, 3>, 3>{{{5, 0, 0}, {0, 3, -4}, {0, 4, 3}}};
  rx.denominator = 5;
  SphereLinear rz;
  rz.numerators = std::array<std::array<std::int64_t, 3>, 3>{{{3, -4, 0}, {4, 3, 0}, {0, 0, 5}}};
  rz.denominator = 5;
  for (auto* r : {&rx, &rz})
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r->m[i][j] = static_cast<double>((*r->numerators)[i][j]) / 5.0;
  return GroupAction(SpaceSpec::sphere2(), {Generator{"a", rx}, Generator{"b", rz}},
                     GroupModel{GroupKind::free, 0});
}

}  // namespace warpcone
