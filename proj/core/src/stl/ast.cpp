#include "stlcbf/stl/ast.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace stlcbf::stl {

PredicateAtom PredicateAtom::affine(Eigen::VectorXd coeff, double offset) {
  PredicateAtom a;
  a.kind = Kind::Affine;
  a.coeff = std::move(coeff);
  a.offset = offset;
  return a;
}

PredicateAtom PredicateAtom::norm(Eigen::VectorXd center, Eigen::VectorXd scale,
                                  double radius, NormOrder order) {
  if (radius <= 0.0) {
    throw std::invalid_argument("norm atom requires radius > 0");
  }
  if (center.size() != scale.size()) {
    throw std::invalid_argument("norm atom: center/scale dimension mismatch");
  }
  PredicateAtom a;
  a.kind = Kind::Norm;
  a.center = std::move(center);
  a.scale = std::move(scale);
  a.radius = radius;
  a.order = order;
  return a;
}

PredicateAtom PredicateAtom::ball(Eigen::VectorXd center, double radius, NormOrder order) {
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(center.size());
  return norm(std::move(center), std::move(scale), radius, order);
}

int PredicateAtom::dim() const {
  return static_cast<int>(kind == Kind::Affine ? coeff.size() : center.size());
}

// Evaluated with plain index-order loops so the result is a well-defined
// IEEE value independent of vectorized reduction order.
double PredicateAtom::eval(const Eigen::VectorXd& x) const {
  if (x.size() != dim()) {
    throw std::invalid_argument("predicate atom: state dimension mismatch");
  }
  if (kind == Kind::Affine) {
    double s = offset;
    for (int i = 0; i < x.size(); ++i) s += coeff[i] * x[i];
    return s;
  }
  double nrm = 0.0;
  switch (order) {
    case NormOrder::L1:
      for (int i = 0; i < x.size(); ++i) {
        nrm += std::abs(scale[i] * (x[i] - center[i]));
      }
      break;
    case NormOrder::L2: {
      double s = 0.0;
      for (int i = 0; i < x.size(); ++i) {
        const double d = scale[i] * (x[i] - center[i]);
        s += d * d;
      }
      nrm = std::sqrt(s);
      break;
    }
    case NormOrder::LInf:
      for (int i = 0; i < x.size(); ++i) {
        nrm = std::max(nrm, std::abs(scale[i] * (x[i] - center[i])));
      }
      break;
  }
  return radius - nrm;
}

FormulaPtr make_true() { return std::make_shared<Formula>(Formula{TrueNode{}}); }

FormulaPtr make_atom(PredicateAtom atom) {
  return std::make_shared<Formula>(Formula{std::move(atom)});
}

FormulaPtr make_not(FormulaPtr child) {
  if (!child) throw std::invalid_argument("not: null child");
  return std::make_shared<Formula>(Formula{NotNode{std::move(child)}});
}

static void require_children(const std::vector<FormulaPtr>& cs, const char* what) {
  if (cs.size() < 2) {
    throw std::invalid_argument(std::string(what) + " requires at least 2 children");
  }
  for (const auto& c : cs) {
    if (!c) throw std::invalid_argument(std::string(what) + ": null child");
  }
}

FormulaPtr make_and(std::vector<FormulaPtr> children) {
  require_children(children, "and");
  return std::make_shared<Formula>(Formula{AndNode{std::move(children)}});
}

FormulaPtr make_or(std::vector<FormulaPtr> children) {
  require_children(children, "or");
  return std::make_shared<Formula>(Formula{OrNode{std::move(children)}});
}

int formula_dim(const Formula& f) {
  return std::visit(
      [](const auto& node) -> int {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, TrueNode>) {
          return 0;
        } else if constexpr (std::is_same_v<T, PredicateAtom>) {
          return node.dim();
        } else if constexpr (std::is_same_v<T, NotNode>) {
          return formula_dim(*node.child);
        } else {
          int d = 0;
          for (const auto& c : node.children) d = std::max(d, formula_dim(*c));
          return d;
        }
      },
      f.node);
}

}  // namespace stlcbf::stl
