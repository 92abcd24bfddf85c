#pragma once

#include <Eigen/Core>
#include <memory>
#include <variant>
#include <vector>

namespace stlcbf::stl {

enum class NormOrder { L1, L2, LInf };

// Atomic predicate h(x) >= 0.
//   Affine: h(x) = coeff . x + offset
//   Norm:   h(x) = radius - || scale.asDiagonal() * (x - center) ||_p
struct PredicateAtom {
  enum class Kind { Affine, Norm };

  Kind kind = Kind::Affine;
  Eigen::VectorXd coeff;
  double offset = 0.0;
  Eigen::VectorXd center;
  Eigen::VectorXd scale;
  double radius = 0.0;
  NormOrder order = NormOrder::L2;

  static PredicateAtom affine(Eigen::VectorXd coeff, double offset);
  static PredicateAtom norm(Eigen::VectorXd center, Eigen::VectorXd scale,
                            double radius, NormOrder order);
  // norm atom with unit scale
  static PredicateAtom ball(Eigen::VectorXd center, double radius, NormOrder order);

  int dim() const;
  double eval(const Eigen::VectorXd& x) const;
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct TrueNode {};
struct NotNode {
  FormulaPtr child;
};
struct AndNode {
  std::vector<FormulaPtr> children;
};
struct OrNode {
  std::vector<FormulaPtr> children;
};

// Boolean (non-temporal) predicate formula.
struct Formula {
  std::variant<TrueNode, PredicateAtom, NotNode, AndNode, OrNode> node;
};

FormulaPtr make_true();
FormulaPtr make_atom(PredicateAtom atom);
FormulaPtr make_not(FormulaPtr child);
FormulaPtr make_and(std::vector<FormulaPtr> children);  // >= 2 children
FormulaPtr make_or(std::vector<FormulaPtr> children);   // >= 2 children

// State dimension required by the formula's atoms; 0 when atom-free.
int formula_dim(const Formula& f);

enum class TemporalOp { Always, Eventually };

struct TemporalBlock {
  TemporalOp op = TemporalOp::Always;
  double a = 0.0;
  double b = 0.0;
  FormulaPtr body;
};

// Conjunction of temporal blocks over the horizon [0, T].
struct Specification {
  std::vector<TemporalBlock> blocks;
  double horizon = 0.0;
  int state_dim = 0;
};

}  // namespace stlcbf::stl
