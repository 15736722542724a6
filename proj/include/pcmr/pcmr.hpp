#pragma once

// Everything except the HTTP binding (pcmr/http.hpp).

#include "pcmr/bigm.hpp"
#include "pcmr/convex.hpp"
#include "pcmr/error.hpp"
#include "pcmr/indices.hpp"
#include "pcmr/io.hpp"
#include "pcmr/json.hpp"
#include "pcmr/pcm.hpp"
#include "pcmr/reduce.hpp"
#include "pcmr/service.hpp"
