#pragma once

#include <map>
#include <memory>
#include <string>
#include <variant>

#include "asymdag/digest.hpp"
#include "asymdag/process_set.hpp"

namespace asymdag {

using BytesPtr = std::shared_ptr<const Bytes>;

/// Multiplexing label for broadcast instances: at most one delivery per
/// (sender, label) at each correct process.
struct InstanceLabel {
    enum class Tag : uint8_t { Input = 0, Vertex = 1 };
    Tag tag = Tag::Input;
    ProcessId sender = 0;
    uint32_t seq = 0;  // gather instance number / vertex round

    auto operator<=>(const InstanceLabel&) const = default;
    std::string to_string() const {
        return std::string(tag == Tag::Input ? "in" : "vtx") + "/" +
               std::to_string(sender + 1) + "/" + std::to_string(seq);
    }
};

/// Echo/Ready vote maps are keyed by payload digest; the wire still carries
/// the full payload so delivery can return bytes.
struct ArbMsg {
    enum class Phase : uint8_t { Send, Echo, Ready };
    Phase phase = Phase::Send;
    InstanceLabel instance;
    BytesPtr payload;
    uint64_t digest = 0;
};

/// A gather value set on the wire: proposer -> value digest. The value bytes
/// travel through the broadcast layer only.
using ValueMap = std::map<ProcessId, uint64_t>;
using ValueMapPtr = std::shared_ptr<const ValueMap>;

struct GatherSetMsg {
    uint32_t round = 2;  // round this message feeds; 2 = DistributeS
    bool final_round = false;
    ValueMapPtr values;
};

struct GatherCtlMsg {
    enum class Kind : uint8_t { Ack, Ready, Confirm };
    Kind kind = Kind::Ack;
};

/// Wave control messages carry their wave number so stale ones are ignored
/// after the round-2 reset.
struct WaveCtlMsg {
    enum class Kind : uint8_t { Ack, Ready, Confirm };
    Kind kind = Kind::Ack;
    uint32_t epoch = 1;
};

using ProtocolMessage = std::variant<ArbMsg, GatherSetMsg, GatherCtlMsg, WaveCtlMsg>;

uint64_t message_digest(const ProtocolMessage& m);
std::string describe_message(const ProtocolMessage& m, uint32_t final_gather_round);

/// One addressed message; dst == kBroadcastAll expands to every process.
constexpr ProcessId kBroadcastAll = 0xffffffff;
struct Outgoing {
    ProcessId dst = kBroadcastAll;
    ProtocolMessage msg;
};

inline ValueMapPtr share_values(ValueMap v) {
    return std::make_shared<const ValueMap>(std::move(v));
}
inline BytesPtr share_bytes(Bytes b) { return std::make_shared<const Bytes>(std::move(b)); }

uint64_t value_map_digest(const ValueMap& v);

}  // namespace asymdag
