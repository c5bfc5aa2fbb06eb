//! Hosts the `acceptance` test target so it runs after every other suite.
