#pragma once

// Finitely generated groups acting on base spaces through concrete
// generator maps, plus free-word arithmetic.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "warpcone/manifold.hpp"

namespace warpcone {

/// A free word over generators. Letters are signed generator indices:
/// +(g+1) for generator g, -(g+1) for its inverse. Always freely reduced.
class Word {
 public:
  Word() = default;
  explicit Word(std::vector<int> letters);

  static Word identity() { return Word(); }
  static Word generator(std::size_t g, bool inverse = false);
  /// Parses "e" or a string of letters a..z (inverse A..Z), e.g. "abA".
  static Word parse(const std::string& text);

  const std::vector<int>& letters() const { return letters_; }
  std::size_t length() const { return letters_.size(); }
  bool is_identity() const { return letters_.empty(); }

  Word inverse() const;
  Word operator*(const Word& rhs) const;
  std::string to_string() const;

  auto operator<=>(const Word&) const = default;

 private:
  std::vector<int> letters_;
};

/// Canonical order of letters: a, A, b, B, ...
int letter_rank(int letter);
bool shortlex_less(const Word& a, const Word& b);

struct CircleRotation {
  double angle = 0.0;
};

/// Orthogonal 3x3 matrix acting on the unit sphere. When the entries are
/// rationals with a common denominator, `numerators`/`denominator` hold them
/// exactly.
struct SphereLinear {
  std::array<std::array<double, 3>, 3> m{};
  std::optional<std::array<std::array<std::int64_t, 3>, 3>> numerators;
  std::int64_t denominator = 1;
};

/// Integer unimodular matrix [[a, b], [c, d]] acting on R^2 / Z^2.
struct TorusLinear {
  std::int64_t a = 1, b = 0, c = 0, d = 1;
};

struct TorusTranslation {
  double dx = 0.0, dy = 0.0;
};

struct Permutation {
  std::vector<std::size_t> image;
};

using GeneratorMap = std::variant<CircleRotation, SphereLinear, TorusLinear, TorusTranslation, Permutation>;

struct Generator {
  std::string name;
  GeneratorMap map;
};

/// Abstract group the generators present, as far as downstream code needs to
/// know it (Følner families and group-level word normal forms).
enum class GroupKind { trivial, integers, integers2, cyclic, free, unknown };

struct GroupModel {
  GroupKind kind = GroupKind::unknown;
  std::size_t order = 0;  // cyclic only

  std::string to_string() const;
  static GroupModel parse(const std::string& text);
};

/// A signed generator as used for wormholes: one entry of S = S u S^-1.
struct Move {
  std::size_t generator;
  bool inverse;
  int letter() const { return inverse ? -static_cast<int>(generator + 1) : static_cast<int>(generator + 1); }
};

/// Generators acting on a space. The generating set used downstream
/// (`moves()`) is symmetric. When `symmetric` is false the caller promises the
/// declared list is already closed under inverses; this is verified.
class GroupAction {
 public:
  GroupAction(SpaceSpec space, std::vector<Generator> generators, GroupModel group, bool symmetric = true);

  const SpaceSpec& space() const { return space_; }
  const std::vector<Generator>& generators() const { return generators_; }
  const GroupModel& group() const { return group_; }
  const std::vector<Move>& moves() const { return moves_; }
  std::size_t generator_count() const { return generators_.size(); }
  /// Lipschitz constant of each generator (and separately its inverse).
  double lipschitz(std::size_t g, bool inverse = false) const;
  double max_lipschitz() const;

  Point apply_letter(int letter, const Point& p) const;

 private:
  SpaceSpec space_;
  std::vector<Generator> generators_;
  GroupModel group_;
  std::vector<Move> moves_;
  std::vector<std::array<double, 2>> lipschitz_;
};

/// Applies the word right to left. The identity word returns `p` unchanged.
Point apply(const GroupAction& action, const Word& w, const Point& p);

struct BallOptions {
  std::size_t max_words = 2'000'000;
};

/// All distinct reduced free words of length <= L, in shortlex order.
std::vector<Word> enumerate_ball(const GroupAction& action, std::size_t L, BallOptions options = {});
std::vector<Word> enumerate_sphere(std::size_t generator_count, std::size_t length);

/// Exact operator norm for linear generators, 1 for isometries.
double lipschitz_estimate(const GroupAction& action, std::size_t generator, bool inverse = false);

/// Exact integer form of a word over rational sphere generators: returns
/// (numerators, denominator) with matrix = numerators / denominator, or
/// nullopt if some generator is not stored exactly.
struct ExactMatrix3 {
  std::array<std::array<std::int64_t, 3>, 3> num{};
  std::int64_t den = 1;
  bool is_identity() const;
};
std::optional<ExactMatrix3> exact_word_matrix(const GroupAction& action, const Word& w);

// Canned actions ------------------------------------------------------------

GroupAction trivial_action(const SpaceSpec& space);
/// Z/n acting on an n-point finite set by i -> i + step.
GroupAction cyclic_shift(std::size_t n, std::size_t step = 1);
/// Rotation of the circle by `turns` full turns (angle 2 pi turns).
GroupAction circle_rotation(double turns, GroupModel group);
/// Z acting on the circle by rotation through 2 pi (sqrt 2 - 1).
GroupAction irrational_rotation();
/// Z acting on the torus by [[2, 1], [1, 1]].
GroupAction cat_map();
/// Free group on rotations by arccos(3/5) about the x and z axes.
GroupAction free_so3();

}  // namespace warpcone
