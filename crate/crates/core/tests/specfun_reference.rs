use oscillab_core::specfun::{hermite_fn, SpecFun};

// h_n(x) evaluated at 60 significant digits (mpmath) and rounded to 20.
const REFERENCE: &[(usize, f64, f64)] = &[
    (0, -19.5, 2.0205712067197040518e-83),
    (0, -7.3, 2.0134278035406461704e-12),
    (0, 0.37, 7.0143119182087778007e-1),
    (0, 3.1, 6.150742507882357729e-3),
    (0, 12.9, 5.4984485427951424261e-37),
    (0, 20.0, 1.0394800321282748097e-87),
    (1, -19.5, -5.5721624483529734257e-82),
    (1, -7.3, -2.0786143418371649653e-11),
    (1, 0.37, 3.6703019668150545434e-1),
    (1, 3.1, 2.6965236767266994709e-2),
    (1, 12.9, 1.0031014846588598537e-35),
    (1, 20.0, 2.9400935185036536256e-86),
    (7, -19.5, -3.3575778106991636041e-75),
    (7, -7.3, -2.878769678637837075e-7),
    (7, 0.37, -4.0224693931842548355e-1),
    (7, 3.1, 4.7689639162040668879e-1),
    (7, 12.9, 4.8852890381295233442e-30),
    (7, 20.0, 2.0650776323185456386e-79),
    (50, -19.5, 2.1969257487382728278e-44),
    (50, -7.3, 2.8985020155965087962e-1),
    (50, 0.37, 2.111298616987566067e-1),
    (50, 3.1, -1.86726032535357884e-1),
    (50, 12.9, 4.3660503060101786115e-8),
    (50, 20.0, 4.3910271825741523162e-48),
    (128, -19.5, 1.4067187544279232399e-12),
    (128, -7.3, 2.0466281250845169288e-1),
    (128, 0.37, 1.8707322984074423845e-1),
    (128, 3.1, 1.2818722846412150152e-1),
    (128, 12.9, 2.0528276066836196055e-1),
    (128, 20.0, 4.2443799992975637065e-15),
    (200, -19.5, 2.6454512080825652955e-1),
    (200, -7.3, -1.207304649665504214e-2),
    (200, 0.37, 7.6781333465277741848e-2),
    (200, 3.1, 9.6446508561951826782e-2),
    (200, 12.9, 1.8976142382077527269e-1),
    (200, 20.0, 2.8836494802620564229e-1),
    (256, -19.5, 4.6564628465143691207e-2),
    (256, -7.3, 1.0298755350778862889e-1),
    (256, 0.37, -8.4175976647812130072e-2),
    (256, 3.1, 1.0750112593620545095e-1),
    (256, 12.9, 1.071830989435054673e-1),
    (256, 20.0, 1.9759118368755588175e-1),
];

#[test]
fn hermite_matches_extended_precision_reference() {
    for &(n, x, expect) in REFERENCE {
        let got = hermite_fn(n, x).unwrap();
        let rel = ((got - expect) / expect).abs();
        assert!(rel < 1e-10, "h_{n}({x}) = {got:e}, reference {expect:e}, rel {rel:e}");
    }
}

#[test]
fn hermite_table_agrees_with_single_evaluations() {
    let sf = SpecFun::default();
    let table = sf.hermite_table(256, 3.1).unwrap();
    for &(n, x, _) in REFERENCE.iter().filter(|r| r.1 == 3.1) {
        assert_eq!(table[n], sf.hermite(n, x).unwrap());
    }
}
