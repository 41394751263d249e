#include "mbx/model.hpp"

#include <algorithm>
#include <deque>

namespace mbx {

ProcessId Cfm::addProcess(const std::string& pname) {
  if (processByName(pname)) throw Error("duplicate process '" + pname + "'");
  processes.push_back(ProcessLts{pname, {}, 0, {}});
  return static_cast<ProcessId>(processes.size() - 1);
}

MessageId Cfm::internMessage(const std::string& mname) {
  for (std::size_t i = 0; i < messageNames.size(); ++i)
    if (messageNames[i] == mname) return static_cast<MessageId>(i);
  messageNames.push_back(mname);
  return static_cast<MessageId>(messageNames.size() - 1);
}

LocalState Cfm::internState(ProcessId p, const std::string& sname) {
  auto& names = processes.at(p).stateNames;
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == sname) return static_cast<LocalState>(i);
  names.push_back(sname);
  return static_cast<LocalState>(names.size() - 1);
}

std::optional<ProcessId> Cfm::processByName(const std::string& pname) const {
  for (std::size_t i = 0; i < processes.size(); ++i)
    if (processes[i].name == pname) return static_cast<ProcessId>(i);
  return std::nullopt;
}

std::optional<MessageId> Cfm::messageByName(const std::string& mname) const {
  for (std::size_t i = 0; i < messageNames.size(); ++i)
    if (messageNames[i] == mname) return static_cast<MessageId>(i);
  return std::nullopt;
}

std::optional<LocalState> Cfm::stateByName(ProcessId p, const std::string& sname) const {
  const auto& names = processes.at(p).stateNames;
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == sname) return static_cast<LocalState>(i);
  return std::nullopt;
}

std::size_t Cfm::size() const {
  std::size_t total = 0;
  for (const auto& p : processes) total += p.stateNames.size() + p.transitions.size();
  return total;
}

void Cfm::validate() const {
  if (processes.empty()) throw Error("system has no processes");
  for (std::size_t p = 0; p < processes.size(); ++p) {
    const auto& lts = processes[p];
    if (lts.stateNames.empty()) throw Error("process '" + lts.name + "' has no states");
    if (lts.initial >= lts.stateNames.size())
      throw Error("process '" + lts.name + "' has an out-of-range initial state");
    for (const auto& t : lts.transitions) {
      if (t.from >= lts.stateNames.size() || t.to >= lts.stateNames.size())
        throw Error("process '" + lts.name + "' has an out-of-range transition endpoint");
      if (t.action.actor != p)
        throw Error("process '" + lts.name + "' owns a transition performed by another process");
      if (t.action.actor == t.action.peer)
        throw Error("self-channel in process '" + lts.name + "'");
      if (t.action.peer >= processes.size())
        throw Error("transition in process '" + lts.name + "' names an unknown peer");
      if (t.action.message >= messageNames.size())
        throw Error("transition in process '" + lts.name + "' names an unknown message");
    }
  }
}

std::string Cfm::actionText(const Action& a) const {
  const std::string& actor = processes.at(a.actor).name;
  const std::string& peer = processes.at(a.peer).name;
  const std::string& msg = messageNames.at(a.message);
  return actor + (a.isSend() ? "!" : "?") + peer + "(" + msg + ")";
}

ProcessNetwork ProcessNetwork::p2p(std::size_t n) {
  ProcessNetwork net;
  net.kind_ = Kind::PeerToPeer;
  net.processCount_ = n;
  net.table_.assign(n * n, 0);
  BufferId next = 0;
  for (std::size_t f = 0; f < n; ++f)
    for (std::size_t t = 0; t < n; ++t)
      if (f != t) net.table_[f * n + t] = next++;
  net.bufferCount_ = next;
  return net;
}

ProcessNetwork ProcessNetwork::mailbox(std::size_t n) {
  ProcessNetwork net;
  net.kind_ = Kind::Mailbox;
  net.processCount_ = n;
  net.table_.assign(n * n, 0);
  for (std::size_t f = 0; f < n; ++f)
    for (std::size_t t = 0; t < n; ++t)
      if (f != t) net.table_[f * n + t] = static_cast<BufferId>(t);
  net.bufferCount_ = n;
  return net;
}

ProcessNetwork ProcessNetwork::custom(std::size_t n, std::vector<BufferId> channelBuffer,
                                      std::size_t bufferCount) {
  if (channelBuffer.size() != n * n) throw Error("channel table must have processCount^2 entries");
  for (std::size_t f = 0; f < n; ++f)
    for (std::size_t t = 0; t < n; ++t)
      if (f != t && channelBuffer[f * n + t] >= bufferCount)
        throw Error("channel table names an out-of-range buffer");
  ProcessNetwork net;
  net.kind_ = Kind::Custom;
  net.processCount_ = n;
  net.bufferCount_ = bufferCount;
  net.table_ = std::move(channelBuffer);
  return net;
}

BufferId ProcessNetwork::buffer(ProcessId from, ProcessId to) const {
  if (from == to) throw Error("channels connect distinct processes");
  return table_.at(std::size_t(from) * processCount_ + to);
}

bool ProcessNetwork::manyToOne() const {
  if (kind_ != Kind::Custom) return true;
  std::vector<int> recipient(bufferCount_, -1);
  for (std::size_t f = 0; f < processCount_; ++f)
    for (std::size_t t = 0; t < processCount_; ++t) {
      if (f == t) continue;
      BufferId b = table_[f * processCount_ + t];
      if (recipient[b] >= 0 && recipient[b] != static_cast<int>(t)) return false;
      recipient[b] = static_cast<int>(t);
    }
  return true;
}

void ProcessNetwork::requireManyToOne(const char* who) const {
  if (!manyToOne()) throw Error(std::string(who) + " requires a many-to-one process network");
}

std::size_t ConfigurationHash::operator()(const Configuration& c) const {
  std::size_t seed = hash_range(c.locals.begin(), c.locals.end());
  for (const auto& buf : c.buffers) {
    hash_combine(seed, buf.size());
    for (const auto& item : buf) {
      hash_combine(seed, (std::size_t(item.from) << 32) ^ (std::size_t(item.to) << 16) ^ item.message);
    }
  }
  return seed;
}

Configuration initial_configuration(const Cfm& cfm, const ProcessNetwork& net) {
  Configuration c;
  c.locals.reserve(cfm.processCount());
  for (const auto& p : cfm.processes) c.locals.push_back(p.initial);
  c.buffers.assign(net.bufferCount(), {});
  return c;
}

std::optional<Configuration> step(const Cfm& cfm, const ProcessNetwork& net,
                                  const Configuration& conf, const Action& act) {
  const auto& lts = cfm.processes.at(act.actor);
  for (const auto& t : lts.transitions) {
    if (t.from != conf.locals[act.actor] || t.action != act) continue;
    BufferId b = net.buffer(act);
    if (act.isSend()) {
      Configuration next = conf;
      next.locals[act.actor] = t.to;
      next.buffers[b].push_back(BufferItem{act.actor, act.peer, act.message});
      return next;
    }
    const auto& buf = conf.buffers[b];
    BufferItem want{act.peer, act.actor, act.message};
    if (buf.empty() || !(buf.front() == want)) continue;  // head mismatch: blocked
    Configuration next = conf;
    next.locals[act.actor] = t.to;
    next.buffers[b].erase(next.buffers[b].begin());
    return next;
  }
  return std::nullopt;
}

RunResult run(const Cfm& cfm, const ProcessNetwork& net, const Trace& trace) {
  Configuration conf = initial_configuration(cfm, net);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    auto next = step(cfm, net, conf, trace[i]);
    if (!next) return RunResult{std::nullopt, i};
    conf = std::move(*next);
  }
  return RunResult{std::move(conf), trace.size()};
}

bool is_viable(const ProcessNetwork& net, const Trace& trace) {
  std::vector<std::deque<Action>> pending(net.bufferCount());
  for (const auto& a : trace) {
    BufferId b = net.buffer(a);
    if (a.isSend()) {
      pending[b].push_back(a);
    } else {
      if (pending[b].empty()) return false;
      const Action& s = pending[b].front();
      if (s.actor != a.peer || s.peer != a.actor || s.message != a.message) return false;
      pending[b].pop_front();
    }
  }
  return true;
}

std::vector<Action> enabled_actions(const Cfm& cfm, const ProcessNetwork& net,
                                    const Configuration& conf) {
  std::vector<Action> out;
  for (std::size_t p = 0; p < cfm.processCount(); ++p) {
    for (const auto& t : cfm.processes[p].transitions) {
      if (t.from != conf.locals[p]) continue;
      if (t.action.isSend()) {
        out.push_back(t.action);
      } else {
        BufferId b = net.buffer(t.action);
        const auto& buf = conf.buffers[b];
        BufferItem want{t.action.peer, t.action.actor, t.action.message};
        if (!buf.empty() && buf.front() == want) out.push_back(t.action);
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {
void expandTraces(const Cfm& cfm, const ProcessNetwork& net, const Configuration& conf,
                  Trace& current, std::size_t maxlen, std::uint64_t& nodes, std::uint64_t cap,
                  std::vector<Trace>& out) {
  if (++nodes > cap) throw BudgetExceeded(cap);
  out.push_back(current);
  if (current.size() == maxlen) return;
  for (const Action& a : enabled_actions(cfm, net, conf)) {
    auto next = step(cfm, net, conf, a);
    current.push_back(a);
    expandTraces(cfm, net, *next, current, maxlen, nodes, cap, out);
    current.pop_back();
  }
}
}  // namespace

std::vector<Trace> traces_up_to(const Cfm& cfm, const ProcessNetwork& net, std::size_t maxlen,
                                std::uint64_t nodeCap) {
  std::vector<Trace> out;
  Trace current;
  std::uint64_t nodes = 0;
  Configuration init = initial_configuration(cfm, net);
  expandTraces(cfm, net, init, current, maxlen, nodes, nodeCap, out);
  return out;
}

Trace projection(const Trace& trace, ProcessId p) {
  Trace out;
  for (const auto& a : trace)
    if (a.actor == p) out.push_back(a);
  return out;
}

}  // namespace mbx
