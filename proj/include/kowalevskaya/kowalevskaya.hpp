#ifndef KOWALEVSKAYA_KOWALEVSKAYA_HPP_
#define KOWALEVSKAYA_KOWALEVSKAYA_HPP_

#include "algebra.hpp"
#include "conserved.hpp"
#include "flow.hpp"
#include "io.hpp"
#include "lax.hpp"
#include "matrix.hpp"
#include "models.hpp"
#include "poisson.hpp"
#include "scalar.hpp"

#endif // KOWALEVSKAYA_KOWALEVSKAYA_HPP_
