#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "ethos/learner.hpp"

namespace ethos::learn {

using logic::Term;

bool ModeDeclaration::matchesGround(const Atom& a) const {
  if (a.predicate != predicate || a.args.size() != args.size()) return false;
  return a.isGround();
}

bool ModeDeclaration::matchesLiteral(const Atom& a) const {
  if (a.predicate != predicate || a.args.size() != args.size()) return false;
  for (std::size_t i = 0; i < args.size(); ++i) {
    bool var = a.args[i].isVariable();
    if (args[i].marker == Placemarker::Ground ? (var || !a.args[i].isGround()) : !var) return false;
  }
  return true;
}

std::string ModeDeclaration::render() const {
  std::string out = kind == Kind::Head ? "modeh(" : "modeb(";
  out += recall ? std::to_string(*recall) : "*";
  out += ", " + predicate;
  if (!args.empty()) {
    out += '(';
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (i) out += ',';
      out += args[i].marker == Placemarker::Ground ? '#' : args[i].marker == Placemarker::Input ? '+' : '-';
      out += args[i].type;
    }
    out += ')';
  }
  return out + ").";
}

std::vector<const ModeDeclaration*> ModeSet::heads() const {
  std::vector<const ModeDeclaration*> out;
  for (const auto& d : declarations)
    if (d.kind == ModeDeclaration::Kind::Head) out.push_back(&d);
  return out;
}

std::vector<const ModeDeclaration*> ModeSet::bodies() const {
  std::vector<const ModeDeclaration*> out;
  for (const auto& d : declarations)
    if (d.kind == ModeDeclaration::Kind::Body) out.push_back(&d);
  return out;
}

std::size_t ModeSet::bodyRank(std::string_view predicate) const {
  auto b = bodies();
  for (std::size_t i = 0; i < b.size(); ++i)
    if (b[i]->predicate == predicate) return i;
  return std::string::npos;
}

bool ModeSet::isHeadPredicate(std::string_view predicate) const {
  auto h = heads();
  return std::any_of(h.begin(), h.end(), [&](const ModeDeclaration* d) { return d->predicate == predicate; });
}

std::string ModeSet::render() const {
  std::string out;
  for (const auto& d : declarations) out += d.render() + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Mode file parsing

namespace {

class ModeScanner {
 public:
  explicit ModeScanner(std::string_view src) : src_(src) {}

  void skip() {
    while (at_ < src_.size()) {
      char c = src_[at_];
      if (c == '%') {
        while (at_ < src_.size() && src_[at_] != '\n') step();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        step();
      } else {
        break;
      }
    }
  }

  bool done() {
    skip();
    return at_ >= src_.size();
  }

  char peek() {
    skip();
    return at_ < src_.size() ? src_[at_] : '\0';
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    step();
  }

  std::string word() {
    skip();
    std::size_t start = at_;
    while (at_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[at_])) || src_[at_] == '_'))
      step();
    if (start == at_) fail("expected a name");
    return std::string(src_.substr(start, at_ - start));
  }

  void step() {
    if (src_[at_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++at_;
  }

  [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, line_, col_); }

 private:
  std::string_view src_;
  std::size_t at_ = 0;
  int line_ = 1;
  int col_ = 1;
};

}  // namespace

ModeSet parseModes(std::string_view text) {
  ModeScanner s(text);
  ModeSet out;
  while (!s.done()) {
    ModeDeclaration d;
    std::string kw = s.word();
    if (kw == "modeh") {
      d.kind = ModeDeclaration::Kind::Head;
    } else if (kw == "modeb") {
      d.kind = ModeDeclaration::Kind::Body;
    } else {
      s.fail("expected modeh or modeb, found '" + kw + "'");
    }
    s.expect('(');
    if (s.peek() == '*') {
      s.step();
    } else {
      std::string n = s.word();
      if (!std::all_of(n.begin(), n.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
        s.fail("recall must be a positive integer or '*'");
      std::size_t r = std::stoul(n);
      if (r == 0) s.fail("recall must be at least 1");
      d.recall = r;
    }
    s.expect(',');
    d.predicate = s.word();
    if (!std::islower(static_cast<unsigned char>(d.predicate[0])))
      s.fail("predicate '" + d.predicate + "' must begin with a lowercase letter");
    if (s.peek() == '(') {
      s.step();
      while (true) {
        ModeArg arg;
        switch (s.peek()) {
          case '+': arg.marker = Placemarker::Input; break;
          case '-': arg.marker = Placemarker::Output; break;
          case '#': arg.marker = Placemarker::Ground; break;
          default: s.fail("expected a placemarker '+type', '-type' or '#type'");
        }
        s.step();
        arg.type = s.word();
        d.args.push_back(std::move(arg));
        if (s.peek() == ',') {
          s.step();
          continue;
        }
        s.expect(')');
        break;
      }
    }
    s.expect(')');
    s.expect('.');
    out.declarations.push_back(std::move(d));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mode conformance

namespace {

void termVars(const Term& t, std::set<std::string>& out) {
  if (t.isVariable()) out.insert(t.name);
  for (const auto& a : t.args) termVars(a, out);
}

bool placeBody(const Rule& clause, const ModeSet& modes, std::set<std::string> bound) {
  auto bodies = modes.bodies();
  std::map<const ModeDeclaration*, std::size_t> used;
  std::vector<bool> placed(clause.body.size(), false);
  std::size_t remaining = clause.body.size();
  while (remaining) {
    bool progress = false;
    for (std::size_t i = 0; i < clause.body.size(); ++i) {
      if (placed[i]) continue;
      const Atom& a = clause.body[i].atom;
      for (const auto* d : bodies) {
        if (!d->matchesLiteral(a)) continue;
        if (d->recall && used[d] >= *d->recall) continue;
        bool ready = true;
        for (std::size_t k = 0; k < d->args.size() && ready; ++k)
          if (d->args[k].marker == Placemarker::Input) ready = bound.count(a.args[k].name) != 0;
        if (!ready) continue;
        ++used[d];
        for (const auto& t : a.args) termVars(t, bound);
        placed[i] = true;
        --remaining;
        progress = true;
        break;
      }
    }
    if (!progress) return false;
  }
  return true;
}

}  // namespace

bool conformsToModes(const Rule& clause, const ModeSet& modes) {
  if (!clause.head || !logic::isSafe(clause)) return false;
  if (std::any_of(clause.body.begin(), clause.body.end(), [](const logic::Literal& l) { return l.naf; }))
    return false;
  for (const auto* h : modes.heads()) {
    if (!h->matchesLiteral(*clause.head)) continue;
    std::set<std::string> bound;
    for (std::size_t k = 0; k < h->args.size(); ++k)
      if (h->args[k].marker == Placemarker::Input) bound.insert(clause.head->args[k].name);
    if (placeBody(clause, modes, bound)) return true;
  }
  return false;
}

}  // namespace ethos::learn
