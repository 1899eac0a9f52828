// Rank-2 sublattice of U+U+<2> with no nonzero value of absolute value <= N.
#include <cstdlib>
#include <iostream>

#include "qforge/qforge.hpp"

using namespace qforge;

int main(int argc, char** argv)
{
    const long bound = argc > 1 ? std::atol(argv[1]) : 4;
    const QuadLattice l = load_lattice("catalog:U+U+<2>");
    const Rank2Result r = find_rank2_avoiding(l, bound);
    json out{{"bound", bound},
             {"basis", to_json(r.lattice.basis)},
             {"gram", to_json(r.lattice.lattice().gram())},
             {"certificate", to_json(r.certificate)},
             {"certificate_valid", verify_certificate(r.certificate, bound).valid}};
    std::cout << format_json(out) << "\n";
}
