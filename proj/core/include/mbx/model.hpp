#pragma once

// Processes, actions, communicating machines, buffer networks and the global
// transition relation. Everything here is immutable after construction and
// safe to share across threads.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mbx/base.hpp"

namespace mbx {

using ProcessId = std::uint16_t;
using MessageId = std::uint16_t;
using LocalState = std::uint16_t;
using BufferId = std::uint16_t;

enum class ActionKind : std::uint8_t { Send, Receive };

/// A communication action. `p!q(m)` is a send by p of m to q; `p?q(m)` is a
/// receive by p of m from q. The channel always runs sender -> receiver.
struct Action {
  ActionKind kind{ActionKind::Send};
  ProcessId actor{0};
  ProcessId peer{0};
  MessageId message{0};

  bool isSend() const { return kind == ActionKind::Send; }
  bool isReceive() const { return kind == ActionKind::Receive; }
  ProcessId channelFrom() const { return isSend() ? actor : peer; }
  ProcessId channelTo() const { return isSend() ? peer : actor; }

  friend bool operator==(const Action& a, const Action& b) {
    return a.kind == b.kind && a.actor == b.actor && a.peer == b.peer && a.message == b.message;
  }
  friend bool operator!=(const Action& a, const Action& b) { return !(a == b); }
  friend bool operator<(const Action& a, const Action& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.actor != b.actor) return a.actor < b.actor;
    if (a.peer != b.peer) return a.peer < b.peer;
    return a.message < b.message;
  }
};

inline Action send(ProcessId from, ProcessId to, MessageId m) {
  return Action{ActionKind::Send, from, to, m};
}
inline Action receive(ProcessId by, ProcessId from, MessageId m) {
  return Action{ActionKind::Receive, by, from, m};
}

struct ActionHash {
  std::size_t operator()(const Action& a) const {
    return (std::size_t(a.kind) << 30) ^ (std::size_t(a.actor) << 20) ^ (std::size_t(a.peer) << 10) ^ a.message;
  }
};

using Trace = std::vector<Action>;

struct LocalTransition {
  LocalState from{0};
  Action action;
  LocalState to{0};
};

/// One process of a system: a finite LTS whose transitions are all performed
/// by that process.
struct ProcessLts {
  std::string name;
  std::vector<std::string> stateNames;
  LocalState initial{0};
  std::vector<LocalTransition> transitions;
};

/// A communicating system: one finite LTS per process plus the message
/// vocabulary. Processes and messages are interned; ids are dense and ordered
/// by first declaration, which keeps hashing and DOT output deterministic.
class Cfm {
 public:
  std::string name = "system";
  std::vector<ProcessLts> processes;
  std::vector<std::string> messageNames;

  ProcessId addProcess(const std::string& pname);
  MessageId internMessage(const std::string& mname);
  LocalState internState(ProcessId p, const std::string& sname);

  std::optional<ProcessId> processByName(const std::string& pname) const;
  std::optional<MessageId> messageByName(const std::string& mname) const;
  std::optional<LocalState> stateByName(ProcessId p, const std::string& sname) const;

  std::size_t processCount() const { return processes.size(); }
  std::size_t messageCount() const { return messageNames.size(); }

  /// Total size: states plus transitions, summed over processes.
  std::size_t size() const;

  /// Checks structural invariants (actors own their transitions, ids in
  /// range, at least one process). Throws Error on violation.
  void validate() const;

  std::string actionText(const Action& a) const;
};

/// Assigns a buffer to every channel. The two built-ins are peer-to-peer
/// (one buffer per channel) and mailbox (one buffer per receiver).
class ProcessNetwork {
 public:
  enum class Kind : std::uint8_t { PeerToPeer, Mailbox, Custom };

  static ProcessNetwork p2p(std::size_t processCount);
  static ProcessNetwork mailbox(std::size_t processCount);
  static ProcessNetwork custom(std::size_t processCount, std::vector<BufferId> channelBuffer,
                               std::size_t bufferCount);

  Kind kind() const { return kind_; }
  std::size_t processCount() const { return processCount_; }
  std::size_t bufferCount() const { return bufferCount_; }
  BufferId buffer(ProcessId from, ProcessId to) const;
  BufferId buffer(const Action& a) const { return buffer(a.channelFrom(), a.channelTo()); }

  /// True when the buffer determines the recipient.
  bool manyToOne() const;

  /// Throws Error unless manyToOne(); partial-order operations call this.
  void requireManyToOne(const char* who) const;

 private:
  Kind kind_ = Kind::Mailbox;
  std::size_t processCount_ = 0;
  std::size_t bufferCount_ = 0;
  std::vector<BufferId> table_;  // (from * n + to) -> buffer
};

struct BufferItem {
  ProcessId from{0};
  ProcessId to{0};
  MessageId message{0};
  friend bool operator==(const BufferItem&, const BufferItem&) = default;
};

struct Configuration {
  std::vector<LocalState> locals;
  std::vector<std::vector<BufferItem>> buffers;
  friend bool operator==(const Configuration&, const Configuration&) = default;
};

struct ConfigurationHash {
  std::size_t operator()(const Configuration& c) const;
};

Configuration initial_configuration(const Cfm& cfm, const ProcessNetwork& net);

/// One step of the global transition relation. Returns the unique successor,
/// or nullopt when the action is blocked (no local transition, or the buffer
/// head does not match).
std::optional<Configuration> step(const Cfm& cfm, const ProcessNetwork& net,
                                  const Configuration& conf, const Action& act);

struct RunResult {
  std::optional<Configuration> finalConfig;  // set iff the whole trace ran
  std::size_t failedIndex = 0;               // first blocked action otherwise
  bool ok() const { return finalConfig.has_value(); }
};

/// Folds step() over the trace from the initial configuration.
RunResult run(const Cfm& cfm, const ProcessNetwork& net, const Trace& trace);

/// FIFO coherence of an action sequence against a network: prefix counts and
/// per-buffer matching of the k-th receive with the k-th send.
bool is_viable(const ProcessNetwork& net, const Trace& trace);

/// All actions enabled in a configuration, in deterministic order.
std::vector<Action> enabled_actions(const Cfm& cfm, const ProcessNetwork& net,
                                    const Configuration& conf);

/// Exactly the traces of length <= maxlen, by exhaustive expansion. Prefix
/// closed. Throws BudgetExceeded past the node cap.
std::vector<Trace> traces_up_to(const Cfm& cfm, const ProcessNetwork& net, std::size_t maxlen,
                                std::uint64_t nodeCap = 1'000'000);

/// Subsequence of actions performed by p.
Trace projection(const Trace& trace, ProcessId p);

}  // namespace mbx
