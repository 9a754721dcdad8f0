//! Gauss-Legendre rules on [-1, 1] as (node, weight) pairs.
//!
//! Generated by `scripts/gen_tables.py quadrature`; do not edit by hand.
#![allow(clippy::excessive_precision)]

/// 10-node rule, used for the bivariate normal correlation integral.
pub const GAUSS_LEGENDRE_10: [(f64, f64); 10] = [
    (-9.7390652851717172008e-1, 6.6671344308688137594e-2),
    (-8.6506336668898451073e-1, 1.4945134915058059315e-1),
    (-6.7940956829902440623e-1, 2.19086362515982044e-1),
    (-4.333953941292471908e-1, 2.6926671930999635509e-1),
    (-1.4887433898163121088e-1, 2.9552422471475287017e-1),
    (1.4887433898163121088e-1, 2.9552422471475287017e-1),
    (4.333953941292471908e-1, 2.6926671930999635509e-1),
    (6.7940956829902440623e-1, 2.19086362515982044e-1),
    (8.6506336668898451073e-1, 1.4945134915058059315e-1),
    (9.7390652851717172008e-1, 6.6671344308688137594e-2),
];

/// 31-node rule, used panel-wise for Owen's T.
pub const GAUSS_LEGENDRE_31: [(f64, f64); 31] = [
    (-9.9708748181947707406e-1, 7.4708315792487758587e-3),
    (-9.84685909665152484e-1, 1.7318620790310582463e-2),
    (-9.6250392509294966179e-1, 2.7009019184979421801e-2),
    (-9.3075699789664816496e-1, 3.6432273912385464024e-2),
    (-8.8976002994827104337e-1, 4.5493707527201102902e-2),
    (-8.3992032014626734009e-1, 5.4103082424916853712e-2),
    (-7.8173314841662494041e-1, 6.217478656102842691e-2),
    (-7.1577678458685328391e-1, 6.9628583235410366168e-2),
    (-6.4270672292426034618e-1, 7.6390386598776616426e-2),
    (-5.6324916140714926272e-1, 8.2392991761589263904e-2),
    (-4.7819378204490248044e-1, 8.7576740608477876126e-2),
    (-3.8838590160823294306e-1, 9.1890113893641478215e-2),
    (-2.9471806998170161662e-1, 9.5290242912319512807e-2),
    (-1.9812119933557062877e-1, 9.7743335386328725093e-2),
    (-9.9555312152341520325e-2, 9.9225011226672307875e-2),
    (0.0, 9.9720544793426451428e-2),
    (9.9555312152341520325e-2, 9.9225011226672307875e-2),
    (1.9812119933557062877e-1, 9.7743335386328725093e-2),
    (2.9471806998170161662e-1, 9.5290242912319512807e-2),
    (3.8838590160823294306e-1, 9.1890113893641478215e-2),
    (4.7819378204490248044e-1, 8.7576740608477876126e-2),
    (5.6324916140714926272e-1, 8.2392991761589263904e-2),
    (6.4270672292426034618e-1, 7.6390386598776616426e-2),
    (7.1577678458685328391e-1, 6.9628583235410366168e-2),
    (7.8173314841662494041e-1, 6.217478656102842691e-2),
    (8.3992032014626734009e-1, 5.4103082424916853712e-2),
    (8.8976002994827104337e-1, 4.5493707527201102902e-2),
    (9.3075699789664816496e-1, 3.6432273912385464024e-2),
    (9.6250392509294966179e-1, 2.7009019184979421801e-2),
    (9.84685909665152484e-1, 1.7318620790310582463e-2),
    (9.9708748181947707406e-1, 7.4708315792487758587e-3),
];
