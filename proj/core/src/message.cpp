#include "asymdag/message.hpp"

namespace asymdag {

uint64_t value_map_digest(const ValueMap& v) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& [pid, digest] : v) {
        uint8_t buf[12];
        for (int i = 0; i < 4; ++i) buf[i] = static_cast<uint8_t>(pid >> (8 * i));
        for (int i = 0; i < 8; ++i) buf[4 + i] = static_cast<uint8_t>(digest >> (8 * i));
        h = fnv64(buf, sizeof buf, h);
    }
    return h;
}

uint64_t message_digest(const ProtocolMessage& m) {
    struct Visitor {
        uint64_t operator()(const ArbMsg& a) const {
            uint64_t h = fnv64(a.instance.to_string());
            h = splitmix64(h ^ (static_cast<uint64_t>(a.phase) << 56) ^ a.digest);
            return h;
        }
        uint64_t operator()(const GatherSetMsg& g) const {
            return splitmix64(0x6761746865720000ull ^ g.round ^ value_map_digest(*g.values));
        }
        uint64_t operator()(const GatherCtlMsg& c) const {
            return splitmix64(0x6763746c00000000ull ^ static_cast<uint64_t>(c.kind));
        }
        uint64_t operator()(const WaveCtlMsg& c) const {
            return splitmix64(0x7763746c00000000ull ^ (static_cast<uint64_t>(c.kind) << 32) ^
                              c.epoch);
        }
    };
    return std::visit(Visitor{}, m);
}

std::string describe_message(const ProtocolMessage& m, uint32_t final_gather_round) {
    struct Visitor {
        uint32_t final_round;
        std::string operator()(const ArbMsg& a) const {
            static const char* names[] = {"SEND", "ECHO", "READY"};
            return std::string("msg=") + names[static_cast<int>(a.phase)] +
                   " inst=" + a.instance.to_string() + " digest=" + hex64(a.digest);
        }
        std::string operator()(const GatherSetMsg& g) const {
            std::string name;
            if (g.round == 2)
                name = "DistributeS";
            else if (g.final_round || g.round == final_round)
                name = "DistributeT";
            else
                name = "Distribute" + std::to_string(g.round);
            return "msg=" + name + " size=" + std::to_string(g.values->size()) +
                   " digest=" + hex64(value_map_digest(*g.values));
        }
        std::string operator()(const GatherCtlMsg& c) const {
            static const char* names[] = {"GatherAck", "GatherReady", "GatherConfirm"};
            return std::string("msg=") + names[static_cast<int>(c.kind)];
        }
        std::string operator()(const WaveCtlMsg& c) const {
            static const char* names[] = {"WaveAck", "WaveReady", "WaveConfirm"};
            return std::string("msg=") + names[static_cast<int>(c.kind)] +
                   " epoch=" + std::to_string(c.epoch);
        }
    };
    return std::visit(Visitor{final_gather_round}, m);
}

}  // namespace asymdag
