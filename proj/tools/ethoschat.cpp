// ethoschat: command-line front end for the ethics reasoning engine.

#include <CLI11.hpp>
#include <httplib.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ethos/dialogue.hpp"
#include "ethos/service.hpp"

namespace fs = std::filesystem;
using namespace ethos;
using codec::Json;

namespace {

std::string readFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StorageError("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<Json> readJsonLines(const std::string& path) {
  std::istringstream in(readFile(path));
  std::vector<Json> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const Json::parse_error& e) {
      throw InvalidWindowError(path + ":" + std::to_string(n) + ": not valid JSON", e.what());
    }
  }
  return out;
}

std::shared_ptr<dialogue::KnowledgeBase> openKb(const std::string& storeDir, const std::string& background,
                                                const std::string& modes) {
  auto store = std::make_shared<store::JournalStore>(storeDir);
  logic::Program b = background.empty() ? dialogue::seedBackground() : logic::parseProgram(readFile(background));
  learn::ModeSet m = modes.empty() ? dialogue::defaultModes() : learn::parseModes(readFile(modes));
  return std::make_shared<dialogue::KnowledgeBase>(store, std::move(b), std::move(m));
}

void printHypothesis(const learn::Hypothesis& h, std::ostream& os) {
  for (const auto& c : h.clauses) {
    os << logic::renderRule(c.clause) << "   % support:";
    for (const auto& s : c.support) os << ' ' << s;
    os << '\n';
  }
}

void printRevisionLog(const learn::Hypothesis& h, std::ostream& os) {
  for (const auto& e : h.revisionLog) {
    os << e.windowId << ": " << learn::actionName(e.action) << '\n';
    for (const auto& r : e.after) os << "    " << r << '\n';
  }
}

std::vector<std::string> splitList(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    auto b = item.find_first_not_of(" \t");
    auto e = item.find_last_not_of(" \t\r");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

bool prompt(const std::string& label, std::string& out) {
  std::cout << label << "> " << std::flush;
  return static_cast<bool>(std::getline(std::cin, out));
}

// Reads one scenario from stdin: either a JSON line or field prompts.
std::optional<dialogue::Scenario> readScenario(bool withLabel) {
  std::string first;
  if (!prompt("product", first)) return std::nullopt;
  if (!first.empty() && first.front() == '{') return dialogue::parseScenario(Json::parse(first));
  dialogue::Session session("cli", withLabel ? dialogue::Phase::Training : dialogue::Phase::Test);
  session.add({dialogue::Role::Customer, dialogue::TurnKind::Request, Json{{"product", first}}});
  std::string handle, annotations, label;
  if (!prompt("response", handle)) return std::nullopt;
  session.add({dialogue::Role::Agent, dialogue::TurnKind::Response, Json{{"handle", handle}}});
  if (!prompt("annotations", annotations)) return std::nullopt;
  for (const auto& a : splitList(annotations))
    session.add({dialogue::Role::Trainer, dialogue::TurnKind::Annotation, Json{{"predicate", a}}});
  if (withLabel) {
    if (!prompt("label", label)) return std::nullopt;
    session.add({dialogue::Role::Trainer, dialogue::TurnKind::Label, Json{{"handle", handle}, {"label", label}}});
  }
  return session.scenario();
}

void printVerdict(const dialogue::Verdict& v) {
  std::cout << dialogue::statusName(v.status) << " (" << v.reason << ", hypothesis v" << v.hypothesisVersion
            << ")\n";
  for (const auto& f : v.firedRules) std::cout << "  fired: " << logic::renderRule(f.rule) << '\n';
}

int cmdServe(const std::string& storeDir, const std::string& host, int port) {
  auto kb = openKb(storeDir, "", "");
  service::Service svc(kb);
  httplib::Server server;
  svc.mount(server);
  std::cerr << "ethoschat: serving " << storeDir << " on http://" << host << ":" << port << "/api/v1\n";
  if (!server.listen(host, port)) {
    std::cerr << "ethoschat: cannot listen on " << host << ":" << port << '\n';
    return 1;
  }
  return 0;
}

int cmdReplay(const std::string& windowsFile, const std::string& storeDir) {
  auto lines = readJsonLines(windowsFile);
  fs::path dir = storeDir;
  bool temporary = dir.empty();
  if (temporary) dir = fs::temp_directory_path() / ("ethoschat-replay-" + std::to_string(::getpid()));
  int status = 0;
  {
    auto kb = openKb(dir.string(), "", "");
    for (const auto& j : lines) {
      dialogue::Scenario s;
      if (j.contains("facts")) {
        // A window line: recover the scenario fields from its facts.
        auto w = codec::windowFromJson(j);
        s.id = w.id;
        for (const auto& f : w.facts) {
          if (f.predicate == "ask" && f.args.size() == 2 && !f.args[1].args.empty())
            s.product = logic::renderTerm(f.args[1].args[0]);
          else if (f.predicate == "answer" && f.args.size() == 1)
            s.response = logic::renderTerm(f.args[0]);
          else
            s.annotations.push_back(f.predicate);
        }
        if (w.conclusions.size() != 1) throw InvalidWindowError("replay expects one conclusion per window", w.id);
        s.label = w.conclusions[0].polarity == learn::Polarity::Positive ? dialogue::Label::Unethical
                                                                         : dialogue::Label::Ethical;
      } else {
        s = dialogue::parseScenario(j);
      }
      try {
        auto out = kb->train(s);
        std::cout << out.windowId << ": " << out.diff;
      } catch (const QuarantineError& e) {
        std::cout << (s.id ? *s.id : "?") << ": quarantined: " << e.what() << '\n';
        status = 2;
      }
    }
    std::cout << "final hypothesis (v" << kb->snapshot()->hypothesisVersion << "):\n";
    printHypothesis(kb->snapshot()->hypothesis, std::cout);
  }
  if (temporary) fs::remove_all(dir);
  return status;
}

int cmdSolve(const std::string& file, std::size_t limit, const std::string& query, const std::string& mode,
             bool explain) {
  auto program = logic::parseProgram(readFile(file));
  if (!query.empty()) {
    auto atom = logic::parseAtom(query);
    auto m = mode == "brave" ? solver::Mode::Brave : solver::Mode::Cautious;
    bool yes = solver::entails(program, atom, m);
    std::cout << (yes ? "yes" : "no") << '\n';
    if (yes && explain) {
      auto models = solver::answerSets(program);
      for (const auto& s : models)
        if (s.contains(atom)) {
          std::cout << codec::toJson(solver::explain(program, atom, s)).dump(2) << '\n';
          break;
        }
    }
    return yes ? 0 : 1;
  }
  auto models = solver::answerSets(program, solver::SolveOptions{{}, limit});
  if (models.empty()) {
    std::cout << "UNSATISFIABLE\n";
    return 1;
  }
  for (std::size_t i = 0; i < models.size(); ++i) std::cout << "Answer " << i + 1 << ": " << models[i].render() << '\n';
  return 0;
}

int cmdLearn(const std::string& windowsFile, const std::string& backgroundFile, const std::string& modesFile,
             const std::string& out) {
  std::vector<learn::ExampleWindow> windows;
  for (const auto& j : readJsonLines(windowsFile)) windows.push_back(codec::windowFromJson(j));
  auto background = backgroundFile.empty() ? logic::Program{} : logic::parseProgram(readFile(backgroundFile));
  auto modes = learn::parseModes(readFile(modesFile));
  auto result = learn::learnStream(windows, background, modes);
  std::cout << "% revision log\n";
  std::ostringstream log;
  printRevisionLog(result.hypothesis, log);
  std::istringstream lines(log.str());
  for (std::string l; std::getline(lines, l);) std::cout << "% " << l << '\n';
  for (const auto& q : result.quarantined) std::cout << "% quarantined " << q.windowId << ": " << q.reason << '\n';
  std::cout << "% hypothesis\n";
  printHypothesis(result.hypothesis, std::cout);
  if (!out.empty()) {
    std::ofstream f(out);
    for (const auto& r : result.hypothesis.render()) f << r << '\n';
    if (!f) throw StorageError("cannot write " + out);
  }
  return result.quarantined.empty() ? 0 : 2;
}

int cmdChat(const std::string& storeDir) {
  auto kb = openKb(storeDir, "", "");
  std::cout << "test phase; enter a product, a response handle and comma-separated annotations (EOF to quit)\n";
  while (true) {
    try {
      auto s = readScenario(false);
      if (!s) break;
      printVerdict(kb->evaluate(*s));
    } catch (const std::exception& e) {
      std::cout << "error: " << e.what() << '\n';
    }
  }
  return 0;
}

int cmdTrain(const std::string& storeDir) {
  auto kb = openKb(storeDir, "", "");
  std::cout << "training phase; label is ethical or unethical (EOF to quit)\n";
  while (true) {
    try {
      auto s = readScenario(true);
      if (!s) break;
      auto out = kb->train(*s);
      std::cout << "before: ";
      printVerdict(out.before);
      std::cout << out.windowId << ": " << out.diff;
    } catch (const std::exception& e) {
      std::cout << "error: " << e.what() << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ethical-reasoning chatbot engine: ASP verdicts and incremental rule learning"};
  app.require_subcommand(1);

  std::string storeDir;
  const auto storeOption = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--store", storeDir, "Knowledge-base directory")->envname("ETHOSCHAT_STORE");
    if (required) opt->required();
  };

  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  storeOption(serve, true);
  int port = 8080;
  std::string host = "127.0.0.1";
  serve->add_option("--port", port, "TCP port")->capture_default_str();
  serve->add_option("--host", host, "Bind address")->capture_default_str();

  auto* replay = app.add_subcommand("replay", "Train on a JSONL file of scenarios or windows");
  std::string windowsFile;
  replay->add_option("--windows", windowsFile, "JSONL file")->required()->check(CLI::ExistingFile);
  storeOption(replay, false);

  auto* solve = app.add_subcommand("solve", "Compute answer sets of a program");
  std::string programFile, query, mode = "cautious";
  std::size_t limit = 0;
  bool explain = false;
  solve->add_option("file", programFile, "Program file")->required()->check(CLI::ExistingFile);
  solve->add_option("--limit", limit, "Stop after this many answer sets (0: all)");
  solve->add_option("--query", query, "Ground atom to test for entailment");
  solve->add_option("--mode", mode, "Entailment mode")->check(CLI::IsMember({"cautious", "brave"}));
  solve->add_flag("--explain", explain, "Print a derivation of the query");

  auto* learnCmd = app.add_subcommand("learn", "Learn a hypothesis from a window stream");
  std::string backgroundFile, modesFile, outFile;
  learnCmd->add_option("--windows", windowsFile, "JSONL window file")->required()->check(CLI::ExistingFile);
  learnCmd->add_option("--background", backgroundFile, "Background program")->check(CLI::ExistingFile);
  learnCmd->add_option("--modes", modesFile, "Mode declarations")->required()->check(CLI::ExistingFile);
  learnCmd->add_option("--out", outFile, "Write the final hypothesis here");

  auto* chat = app.add_subcommand("chat", "Interactive test phase");
  storeOption(chat, true);
  auto* train = app.add_subcommand("train", "Interactive training phase");
  storeOption(train, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) return cmdServe(storeDir, host, port);
    if (*replay) return cmdReplay(windowsFile, storeDir);
    if (*solve) return cmdSolve(programFile, limit, query, mode, explain);
    if (*learnCmd) return cmdLearn(windowsFile, backgroundFile, modesFile, outFile);
    if (*chat) return cmdChat(storeDir);
    if (*train) return cmdTrain(storeDir);
  } catch (const Error& e) {
    std::cerr << "ethoschat: " << e.what();
    if (!e.detail().empty()) std::cerr << " [" << e.detail() << "]";
    std::cerr << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "ethoschat: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
