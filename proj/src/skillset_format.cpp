#include <sstream>

#include "skillmc/skillset.hpp"

namespace skillmc {

namespace {

void print_guard(std::ostream& os, const GuardExpr& g);

void print_guard_child(std::ostream& os, const GuardExpr& g) {
  if (g.kind == GuardExpr::Kind::Atom) {
    print_guard(os, g);
  } else {
    os << '(';
    print_guard(os, g);
    os << ')';
  }
}

void print_guard(std::ostream& os, const GuardExpr& g) {
  switch (g.kind) {
    case GuardExpr::Kind::True:
      // An always-true guard is representable only by omission; callers skip it.
      break;
    case GuardExpr::Kind::Atom:
      os << g.atom.resource << (g.atom.equal ? " == " : " != ") << g.atom.state;
      break;
    case GuardExpr::Kind::Not:
      os << '!';
      print_guard_child(os, g.kids[0]);
      break;
    case GuardExpr::Kind::And:
      print_guard_child(os, g.kids[0]);
      os << " && ";
      print_guard_child(os, g.kids[1]);
      break;
    case GuardExpr::Kind::Or:
      print_guard_child(os, g.kids[0]);
      os << " || ";
      print_guard_child(os, g.kids[1]);
      break;
  }
}

void print_effects_block(std::ostream& os, const std::vector<EffectStmt>& effects,
                         const std::string& ind) {
  if (effects.empty()) return;  // effect-free cases omit the block
  if (effects.size() == 1) {
    os << ind << "effect { " << effects[0].resource << " -> " << effects[0].state << " }\n";
    return;
  }
  os << ind << "effect {\n";
  for (const auto& e : effects) os << ind << "    " << e.resource << " -> " << e.state << "\n";
  os << ind << "}\n";
}

void print_case(std::ostream& os, std::string_view kw, const CaseDecl& c) {
  os << "        " << kw << " {\n";
  os << "            " << c.name << " {\n";
  print_effects_block(os, c.effects, "                ");
  os << "            }\n";
  os << "        }\n";
}

}  // namespace

std::string format_guard(const GuardExpr& g) {
  std::ostringstream os;
  print_guard(os, g);
  return os.str();
}

std::string format_skillset(const SkillsetAst& ast) {
  std::ostringstream os;
  os << "skillset " << ast.name << " {\n";
  if (!ast.resources.empty()) {
    os << "    resource {\n";
    for (const auto& r : ast.resources) {
      os << "        " << r.name << " {\n";
      os << "            state {";
      for (const auto& s : r.states) os << ' ' << s;
      os << " }\n";
      os << "            initial " << r.initial << "\n";
      if (r.transitions.all) {
        os << "            transition all\n";
      } else {
        os << "            transition {\n";
        for (const auto& [from, to] : r.transitions.pairs)
          os << "                " << from << " -> " << to << "\n";
        os << "            }\n";
      }
      os << "        }\n";
    }
    os << "    }\n";
  }
  for (const auto& s : ast.skills) {
    os << "    skill " << s.name << " {\n";
    if (!s.inputs.empty()) {
      os << "        input {\n";
      for (const auto& io : s.inputs)
        os << "            " << io.name << ": " << io.type << "\n";
      os << "        }\n";
    }
    for (const auto& io : s.outputs)
      os << "        output " << io.name << ": " << io.type << "\n";
    if (!s.precondition.is_true())
      os << "        precondition { " << format_guard(s.precondition) << " }\n";
    for (const auto& e : s.start_effects)
      os << "        start " << e.resource << " -> " << e.state << "\n";
    if (!s.invariants.empty()) {
      os << "        invariant {\n";
      for (const auto& inv : s.invariants)
        os << "            " << inv.name << " { guard " << format_guard(inv.guard) << " }\n";
      os << "        }\n";
    }
    if (!s.interrupt_effects.empty()) {
      os << "        interrupt {\n";
      print_effects_block(os, s.interrupt_effects, "            ");
      os << "        }\n";
    }
    for (const auto& c : s.success_cases) print_case(os, "success", c);
    for (const auto& c : s.failure_cases) print_case(os, "failure", c);
    os << "    }\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace skillmc
