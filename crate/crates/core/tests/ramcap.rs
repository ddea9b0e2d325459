//! The ramification cap is process-wide, so these checks run in their own
//! test binary.

use arcspace::newton::{np_roots, NewtonError, PolyOverSeries};
use arcspace::parser::{parse_poly, parse_series};
use arcspace::puiseux::{ram_cap, set_ram_cap, SeriesError, DEFAULT_RAM_CAP};
use arcspace::qarith::Exp;

#[test]
fn cap_bounds_new_denominators() {
    assert_eq!(ram_cap(), DEFAULT_RAM_CAP);
    let t = parse_series("t + t^2").unwrap();
    assert!(t.pow(Exp::new(1, 5), Exp::int(2)).is_ok());

    set_ram_cap(4);
    let e = t.pow(Exp::new(1, 5), Exp::int(2)).unwrap_err();
    assert_eq!(e, SeriesError::RamificationCap { needed: 5, cap: 4 });
    assert!(t.pow(Exp::new(1, 4), Exp::int(2)).is_ok());

    // Sums are infallible but the result can be checked.
    let s = &parse_series("t^(1/2)").unwrap() + &parse_series("t^(1/3)").unwrap();
    assert_eq!(s.ram(), 6);
    assert!(s.check_ram().is_err());

    let p = PolyOverSeries::new(parse_poly("X^5 - t").unwrap()).unwrap();
    assert!(matches!(np_roots(&p, Exp::int(2)), Err(NewtonError::Series(SeriesError::RamificationCap { .. }))));

    set_ram_cap(0);
    assert_eq!(ram_cap(), 1);
    set_ram_cap(DEFAULT_RAM_CAP);
}
