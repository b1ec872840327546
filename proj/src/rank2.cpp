#include "dht/rank2.hpp"

namespace dht {

template MuFromW<double> muFromW<double>(double, double);
template Rank2Constitutive<double> constitutiveRank2<double>(double, double, double, const MaterialConstants&);

}  // namespace dht
