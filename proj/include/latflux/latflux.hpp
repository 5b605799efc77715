#ifndef LATFLUX_LATFLUX_HPP
#define LATFLUX_LATFLUX_HPP

// Everything except the HTTP service, which pulls in httplib.
#include "additive.hpp"
#include "bitset.hpp"
#include "context.hpp"
#include "dimdraw.hpp"
#include "enumerate.hpp"
#include "forces.hpp"
#include "geometry.hpp"
#include "io.hpp"
#include "isomorphism.hpp"
#include "lattice.hpp"
#include "layout.hpp"
#include "named.hpp"
#include "pipeline.hpp"
#include "render.hpp"
#include "sat.hpp"

#endif // LATFLUX_LATFLUX_HPP
