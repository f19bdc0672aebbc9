// SPDX-License-Identifier: Apache-2.0
//
// tsnfv: operator entry point. Lifecycle commands work on a state file;
// `serve` exposes the same workspace over TCP.
#include <csignal>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tsnfv/descriptors.hpp"
#include "tsnfv/error.hpp"
#include "tsnfv/json_io.hpp"
#include "tsnfv/service.hpp"
#include "tsnfv/workspace.hpp"

namespace {

using namespace tsnfv;

constexpr int kOk = 0;
constexpr int kInput = 1;
constexpr int kVerifyFailed = 3;

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop.store(true); }

struct Options {
  std::string topology;
  std::string nsd;
  std::string placement;
  std::string state;
  std::string listen = "127.0.0.1:7447";
  double bg_load = 1.0;
  std::uint64_t seed = 1;
  std::string instance_id;
  std::vector<std::string> show_args;
};

std::unique_ptr<Workspace> open_workspace(const Options& o, bool may_create) {
  if (!o.state.empty() && std::filesystem::exists(o.state)) {
    auto ws = Workspace::load(o.state);
    if (!o.topology.empty() && !(Topology::load(o.topology) == ws->topology()))
      throw ValidationError("state file " + o.state + " belongs to a different topology");
    return ws;
  }
  if (!may_create) throw ValidationError("state file '" + o.state + "' not found");
  if (o.topology.empty()) throw ValidationError("--topology is required when no state file exists yet");
  return std::make_unique<Workspace>(Topology::load(o.topology));
}

void save(const Options& o, const Workspace& ws) {
  if (!o.state.empty()) ws.save(o.state);
}

Nsd load_nsd(const Options& o) {
  if (o.nsd.empty()) throw ValidationError("--nsd is required");
  return parse_nsd(io::read_file(o.nsd));
}

Placement load_placement(const Options& o) {
  if (o.placement.empty()) throw ValidationError("--placement is required");
  return parse_placement(io::read_file(o.placement));
}

int report_failure(const std::exception& e) {
  std::cerr << "error: " << e.what() << "\n";
  return exit_code_of(e);
}

int cmd_instantiate(const Options& o) {
  auto ws = open_workspace(o, true);
  const Nsd nsd = load_nsd(o);
  const Placement placement = load_placement(o);
  try {
    const NsInstance& inst = ws->instantiate(nsd, placement);
    save(o, *ws);
    std::cout << inst.instance_id << "\n" << render_instance(inst);
    return kOk;
  } catch (const AdmissionFailed& e) {
    save(o, *ws);
    std::cout << "admission failed: instance " << e.instance_id() << " stream " << e.stream_id() << " domain "
              << e.domain_id() << " cause " << e.cause() << "\n";
    return report_failure(e);
  }
}

int cmd_terminate(const Options& o) {
  auto ws = open_workspace(o, false);
  const NsInstance& inst = ws->terminate(o.instance_id);
  save(o, *ws);
  std::cout << render_instance(inst);
  return kOk;
}

int cmd_update(const Options& o) {
  auto ws = open_workspace(o, false);
  const Nsd nsd = load_nsd(o);
  const Placement placement = load_placement(o);
  try {
    const NsInstance& inst = ws->update(o.instance_id, nsd, placement);
    save(o, *ws);
    std::cout << render_instance(inst);
    return kOk;
  } catch (const UpdateFailed& e) {
    save(o, *ws);
    std::cout << render_instance(ws->cuc().instance(o.instance_id));
    return report_failure(e);
  }
}

int cmd_show(const Options& o) {
  auto ws = open_workspace(o, false);
  const auto& a = o.show_args;
  const std::string what = a.empty() ? "" : a[0];
  auto need_arg = [&](const char* name) {
    if (a.size() != 2) throw ValidationError(std::string("usage: show ") + name + " <id>");
    return a[1];
  };
  if (what == "streams" && a.size() == 1) {
    std::cout << render_streams(*ws);
  } else if (what == "gcl") {
    std::cout << render_gcl(*ws, need_arg("gcl"));
  } else if (what == "config") {
    std::cout << render_config(*ws, need_arg("config"));
  } else if (what == "audit" && a.size() == 1) {
    std::cout << render_audit(*ws);
  } else if (what == "instance") {
    std::cout << io::dump_document(to_json(ws->cuc().instance(need_arg("instance"))));
  } else if (what == "bridges" && a.size() == 1) {
    io::Json docs = io::Json::array();
    for (const auto& b : ws->bridge_configs()) docs.push_back(to_json(b));
    std::cout << io::dump_document(docs);
  } else {
    throw ValidationError("unknown selector; use streams | gcl <port> | config <station> | audit | "
                          "instance <id> | bridges");
  }
  return kOk;
}

int cmd_verify(const Options& o) {
  auto ws = open_workspace(o, false);
  SimConfig cfg;
  cfg.bg_load = o.bg_load;
  cfg.seed = o.seed;
  cfg.validate();
  const VerifyResult r = ws->verify(o.instance_id, cfg);
  std::cout << render_verify(r);
  return r.pass ? kOk : kVerifyFailed;
}

int cmd_serve(const Options& o) {
  auto ws = open_workspace(o, true);
  std::optional<std::filesystem::path> state;
  if (!o.state.empty()) state = o.state;
  Server server(*ws, o.listen, state);
  struct sigaction sa {};
  sa.sa_handler = on_signal;
  sigemptyset(&sa.sa_mask);
  sigaction(SIGINT, &sa, nullptr);
  sigaction(SIGTERM, &sa, nullptr);
  std::cout << "listening on port " << server.port() << std::endl;
  server.run(g_stop);
  if (state) ws->save(*state);
  std::cout << "stopped" << std::endl;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TSN stream orchestration for NFV network services"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--topology", o.topology, "topology document");
  app.add_option("--nsd", o.nsd, "network service descriptor");
  app.add_option("--placement", o.placement, "placement document");
  app.add_option("--state", o.state, "workspace state file");
  app.add_option("--bg-load", o.bg_load, "best-effort load for verify, 0..1");
  app.add_option("--seed", o.seed, "background traffic seed");
  app.add_option("--listen", o.listen, "serve address host:port");

  auto* inst = app.add_subcommand("instantiate", "instantiate a network service");
  auto* term = app.add_subcommand("terminate", "terminate an instance");
  term->add_option("instance", o.instance_id)->required();
  auto* upd = app.add_subcommand("update", "replace an instance's descriptors");
  upd->add_option("instance", o.instance_id)->required();
  auto* show = app.add_subcommand("show", "streams | gcl <port> | config <station> | audit | instance <id> | bridges");
  show->add_option("what", o.show_args)->required();
  auto* ver = app.add_subcommand("verify", "simulate an instance and check its bounds");
  ver->add_option("instance", o.instance_id)->required();
  auto* srv = app.add_subcommand("serve", "serve the workspace over TCP");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInput;
  }

  try {
    if (inst->parsed()) return cmd_instantiate(o);
    if (term->parsed()) return cmd_terminate(o);
    if (upd->parsed()) return cmd_update(o);
    if (show->parsed()) return cmd_show(o);
    if (ver->parsed()) return cmd_verify(o);
    if (srv->parsed()) return cmd_serve(o);
  } catch (const std::exception& e) {
    return report_failure(e);
  }
  return kInput;
}
