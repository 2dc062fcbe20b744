#ifndef SWITCHCRAFT_SWITCHCRAFT_HPP
#define SWITCHCRAFT_SWITCHCRAFT_HPP

// minimum-fuel low-thrust extremals by indirect shooting, thrust-swept
// switching surfaces, and N-impulse extraction/refinement

#include "switchcraft/pipeline.hpp"

#endif
