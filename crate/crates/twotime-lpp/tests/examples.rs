// Every example runs to completion.

macro_rules! example {
    ($name:ident, $file:literal) => {
        mod $name {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }

        #[test]
        fn $name() {
            $name::run_example().expect(concat!($file, " should run"));
        }
    };
}

example!(airy_functions, "airy_functions.rs");
example!(tracy_widom, "tracy_widom.rs");
example!(simulate_lpp, "simulate_lpp.rs");
example!(two_time_distribution, "two_time_distribution.rs");
example!(q_form_and_duality, "q_form_and_duality.rs");
example!(finite_exact, "finite_exact.rs");
example!(mc_vs_limit, "mc_vs_limit.rs");
