"""Red-blue segment preprocessing with persistent bundle trees and oracle-guided search."""
