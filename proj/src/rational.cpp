#include "qramsey/rational.hpp"

namespace qramsey {

Rat parse_rat(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("empty rational literal");
    auto slash = text.find('/');
    if (slash != std::string::npos) {
        BigInt num(text.substr(0, slash));
        BigInt den(text.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("zero denominator in '" + text + "'");
        return Rat(num, den);
    }
    auto dot = text.find('.');
    if (dot != std::string::npos) {
        std::string head = text.substr(0, dot);
        std::string frac = text.substr(dot + 1);
        for (char c : frac)
            if (c < '0' || c > '9') throw std::invalid_argument("bad rational literal '" + text + "'");
        bool neg = !head.empty() && head[0] == '-';
        BigInt ip = head.empty() || head == "-" ? BigInt(0) : BigInt(head);
        BigInt den = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
        BigInt num = ip * den + (neg ? -BigInt(frac.empty() ? "0" : frac) : BigInt(frac.empty() ? "0" : frac));
        return Rat(num, den);
    }
    return Rat(BigInt(text), BigInt(1));
}

}  // namespace qramsey
